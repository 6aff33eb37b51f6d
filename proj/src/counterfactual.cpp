#include "evidx/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "evidx/io.hpp"
#include "evidx/rng.hpp"

namespace evidx {

std::optional<VolumeGrid> corrupt_case(const Case& c, const MCLabelSet& labels,
                                       double noise_sigma, std::uint64_t seed) {
  std::set<int> severe;
  for (const auto& [code, sev] : labels.labels)
    if (sev == Severity::Severe) severe.insert(code);
  if (severe.empty()) return std::nullopt;

  double mean = 0.0;
  for (float v : c.volume.data) mean += double(v);
  mean /= double(c.volume.data.size());
  double var = 0.0;
  for (float v : c.volume.data) {
    const double d = double(v) - mean;
    var += d * d;
  }
  const double sigma = noise_sigma * std::sqrt(var / double(c.volume.data.size()));

  VolumeGrid out = c.volume;
  Rng rng(mix_seed(seed, c.id));
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    if (!severe.count(int(c.parcellation.labels[i]))) continue;
    const double v = double(out.data[i]) + sigma * rng.gaussian();
    out.data[i] = float(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

CounterfactualResult counterfactual_test(const Network& net,
                                         const std::vector<double>& params,
                                         const std::vector<const Case*>& cases,
                                         const AtlasConfig& atlas, const LabelMap& labels,
                                         double noise_sigma, std::uint64_t seed,
                                         double bin_width) {
  if (bin_width <= 0.0) throw ConfigError("bin width must be positive");
  std::vector<const Case*> ordered = cases;
  std::sort(ordered.begin(), ordered.end(),
            [](const Case* a, const Case* b) { return a->id < b->id; });

  std::vector<std::optional<CounterfactualPair>> slots(ordered.size());
  std::string failure;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)ordered.size(); ++i) {
    try {
      const Case& c = *ordered[std::size_t(i)];
      auto lit = labels.find(c.id);
      if (lit == labels.end())
        throw LabelError("case '" + c.id + "' has no severity label set");
      auto corrupted = corrupt_case(c, lit->second, noise_sigma, seed);
      if (!corrupted) continue;  // no Severe region: not eligible
      const auto& cfg = net.config();
      auto in_orig = build_model_input(c, atlas, cfg);
      auto in_corr =
          build_model_input(*corrupted, c.parcellation, c.measures, atlas, cfg);
      CounterfactualPair pair;
      pair.case_id = c.id;
      pair.p_orig = net.predict(in_orig, params).p_ad[1];
      pair.p_corrupt = net.predict(in_corr, params).p_ad[1];
      pair.dif = std::abs(pair.p_corrupt - pair.p_orig);
      slots[std::size_t(i)] = pair;
    } catch (const std::exception& e) {
#pragma omp critical
      failure = e.what();
    }
  }
  if (!failure.empty()) throw Error(failure);

  CounterfactualResult result;
  result.bin_width = bin_width;
  result.noise_seed = seed;
  const auto n_bins = std::size_t(std::ceil(1.0 / bin_width));
  result.histogram.assign(n_bins, 0);
  for (auto& slot : slots) {
    if (!slot) continue;
    auto bin = std::size_t(std::floor(slot->dif / bin_width));
    if (bin >= n_bins) bin = n_bins - 1;  // dif == 1.0 lands in the last bin
    result.histogram[bin] += 1;
    result.pairs.push_back(std::move(*slot));
  }
  if (result.pairs.empty())
    throw EmptyEvalError("no case carries a Severe-labeled region");
  return result;
}

void write_counterfactual_pairs_csv(const std::filesystem::path& path,
                                    const CounterfactualResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "case_id,p_orig,p_corrupt,dif\n";
  for (const auto& p : result.pairs)
    out << p.case_id << ',' << p.p_orig << ',' << p.p_corrupt << ',' << p.dif << '\n';
  io::write_text_file(path, out.str());
}

void write_counterfactual_histogram_csv(const std::filesystem::path& path,
                                        const CounterfactualResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "bin_low,bin_high,count\n";
  for (std::size_t b = 0; b < result.histogram.size(); ++b) {
    out << double(b) * result.bin_width << ',' << double(b + 1) * result.bin_width << ','
        << result.histogram[b] << '\n';
  }
  io::write_text_file(path, out.str());
}

}  // namespace evidx
