#include "evidx/split.hpp"

#include <algorithm>
#include <cmath>

#include "evidx/rng.hpp"

namespace evidx {

namespace {

long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

long clamp_long(long x, long lo, long hi) { return std::max(lo, std::min(hi, x)); }

std::vector<std::string> sorted_ids_of_class(
    const std::map<std::string, Diagnosis>& table, Diagnosis d) {
  std::vector<std::string> ids;
  for (const auto& [id, diag] : table)
    if (diag == d) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

std::map<std::string, Diagnosis> diagnosis_table(const std::vector<Case>& cases) {
  std::map<std::string, Diagnosis> table;
  for (const auto& c : cases) {
    if (!table.emplace(c.id, c.diagnosis).second)
      throw Error("duplicate case id '" + c.id + "'");
  }
  return table;
}

DatasetSplit split_dataset(const std::map<std::string, Diagnosis>& table,
                           std::uint64_t seed) {
  std::vector<std::string> nc = sorted_ids_of_class(table, Diagnosis::NC);
  std::vector<std::string> ad = sorted_ids_of_class(table, Diagnosis::AD);
  const long n_nc = static_cast<long>(nc.size());
  const long n_ad = static_cast<long>(ad.size());
  const long n = n_nc + n_ad;
  if (n < 6)
    throw InsufficientDataError("need at least 6 NC/AD cases, got " + std::to_string(n));
  if (n_nc < 1 || n_ad < 1)
    throw InsufficientDataError("need at least one case of each detection class");

  const long t_train = 4 * n / 6;
  const long t_val = n / 6;
  const long t_test = n - t_train - t_val;

  // Apportion NC counts per split; AD takes the complement. The clamps keep
  // both classes feasible in degenerate mixtures.
  long nc_train = clamp_long(round_half_up(double(t_train) * n_nc / n),
                             std::max(0L, t_train - n_ad), std::min(n_nc, t_train));
  long ad_train = t_train - nc_train;
  long nc_val = clamp_long(round_half_up(double(t_val) * n_nc / n),
                           std::max(0L, t_val - (n_ad - ad_train)),
                           std::min(n_nc - nc_train, t_val));
  long ad_val = t_val - nc_val;
  long nc_test = n_nc - nc_train - nc_val;
  long ad_test = n_ad - ad_train - ad_val;
  if (nc_test < 0 || ad_test < 0 || nc_test + ad_test != t_test)
    throw Error("internal split apportionment failure");

  Rng rng_nc(stream_seed(seed, "split.nc"));
  Rng rng_ad(stream_seed(seed, "split.ad"));
  rng_nc.shuffle(nc);
  rng_ad.shuffle(ad);

  DatasetSplit split;
  split.seed = seed;
  auto take = [](std::vector<std::string>& pool, long begin, long count,
                 std::vector<std::string>& out) {
    out.insert(out.end(), pool.begin() + begin, pool.begin() + begin + count);
  };
  take(nc, 0, nc_train, split.train);
  take(ad, 0, ad_train, split.train);
  take(nc, nc_train, nc_val, split.val);
  take(ad, ad_train, ad_val, split.val);
  take(nc, nc_train + nc_val, nc_test, split.test);
  take(ad, ad_train + ad_val, ad_test, split.test);
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

DatasetSplit split_dataset(const std::vector<Case>& cases, std::uint64_t seed) {
  std::map<std::string, Diagnosis> table;
  for (const auto& c : cases) {
    if (c.diagnosis == Diagnosis::MCI) continue;
    if (!table.emplace(c.id, c.diagnosis).second)
      throw Error("duplicate case id '" + c.id + "'");
  }
  return split_dataset(table, seed);
}

std::vector<std::string> subsample_fraction(
    const std::vector<std::string>& ids,
    const std::map<std::string, Diagnosis>& table, double fraction,
    std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("fraction must lie in (0, 1]");
  std::vector<std::string> out;
  for (Diagnosis d : {Diagnosis::NC, Diagnosis::AD}) {
    std::vector<std::string> pool;
    for (const auto& id : ids) {
      auto it = table.find(id);
      if (it == table.end()) throw Error("id '" + id + "' missing from diagnosis table");
      if (it->second == d) pool.push_back(id);
    }
    std::sort(pool.begin(), pool.end());
    Rng rng(stream_seed(seed, d == Diagnosis::NC ? "fraction.nc" : "fraction.ad"));
    rng.shuffle(pool);
    auto count = static_cast<std::size_t>(std::floor(fraction * double(pool.size())));
    if (count == 0)
      throw InsufficientDataError("fraction " + std::to_string(fraction) +
                                  " leaves no " + to_string(d) + " cases");
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<long>(count));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace evidx
