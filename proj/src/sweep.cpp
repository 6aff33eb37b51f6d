#include "evidx/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

#include "evidx/io.hpp"

namespace evidx {

using nlohmann::json;

namespace {

constexpr double kAllowedFractions[] = {0.25, 0.5, 0.75, 1.0};

bool is_baseline(Strategy s) {
  return s == Strategy::BaselineRandom || s == Strategy::BaselinePretrained;
}

}  // namespace

SweepResult data_efficiency_sweep(const std::vector<Case>& cases,
                                  const AtlasConfig& atlas, const LabelMap& labels,
                                  const TrainConfig& base,
                                  const std::vector<Strategy>& strategies,
                                  const std::vector<double>& fractions,
                                  const std::vector<std::uint64_t>& seeds) {
  if (strategies.empty() || fractions.empty() || seeds.empty())
    throw ConfigError("sweep needs at least one strategy, fraction and seed");
  for (double f : fractions) {
    if (std::none_of(std::begin(kAllowedFractions), std::end(kAllowedFractions),
                     [f](double a) { return a == f; }))
      throw ConfigError("sweep fractions must come from {0.25, 0.5, 0.75, 1.0}");
  }

  SweepResult result;
  result.fractions = fractions;
  std::sort(result.fractions.begin(), result.fractions.end());
  result.strategies = strategies;

  auto run_cell = [&](Strategy s, double fraction, std::uint64_t seed) {
    TrainConfig cfg = base;
    cfg.strategy = s;
    cfg.data_fraction = fraction;
    cfg.seed = seed;
    TrainResult r = train_strategy(cases, atlas, labels, cfg);
    result.cells.push_back(
        {s, fraction, seed, r.test_metrics.accuracy, r.test_metrics.auroc});
  };

  for (Strategy s : strategies)
    for (double f : result.fractions)
      for (std::uint64_t seed : seeds) run_cell(s, f, seed);

  // The reference line needs a baseline trained on everything.
  const bool have_baseline_full =
      std::any_of(result.cells.begin(), result.cells.end(), [](const SweepCell& c) {
        return is_baseline(c.strategy) && c.fraction == 1.0;
      });
  if (!have_baseline_full)
    for (std::uint64_t seed : seeds) run_cell(Strategy::BaselineRandom, 1.0, seed);

  std::map<std::string, std::pair<double, double>> baseline_means;  // acc, auroc sums
  std::map<std::string, long> baseline_counts;
  for (const auto& c : result.cells) {
    if (!is_baseline(c.strategy) || c.fraction != 1.0) continue;
    auto key = to_string(c.strategy);
    baseline_means[key].first += c.accuracy;
    baseline_means[key].second += c.auroc;
    baseline_counts[key] += 1;
  }
  double best_acc = -1.0;
  for (const auto& [key, sums] : baseline_means) {
    const double n = double(baseline_counts[key]);
    if (sums.first / n > best_acc) {
      best_acc = sums.first / n;
      result.reference_accuracy = sums.first / n;
      result.reference_auroc = sums.second / n;
      result.reference_strategy = key;
    }
  }
  return result;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "strategy,fraction,seed,accuracy,auroc\n";
  for (const auto& c : result.cells)
    out << to_string(c.strategy) << ',' << c.fraction << ',' << c.seed << ',' << c.accuracy
        << ',' << c.auroc << '\n';
  io::write_text_file(path, out.str());
}

void write_sweep_plotdata(const std::filesystem::path& path, const SweepResult& result) {
  std::map<std::string, std::map<double, std::pair<double, long>>> acc_series;
  std::map<std::string, std::map<double, std::pair<double, long>>> auroc_series;
  for (const auto& c : result.cells) {
    auto key = to_string(c.strategy);
    acc_series[key][c.fraction].first += c.accuracy;
    acc_series[key][c.fraction].second += 1;
    auroc_series[key][c.fraction].first += c.auroc;
    auroc_series[key][c.fraction].second += 1;
  }
  json series = json::object();
  for (const auto& [key, points] : acc_series) {
    json acc = json::array(), xs = json::array(), roc = json::array();
    for (const auto& [fraction, sum_count] : points) {
      xs.push_back(fraction);
      acc.push_back(sum_count.first / double(sum_count.second));
      const auto& r = auroc_series[key][fraction];
      roc.push_back(r.first / double(r.second));
    }
    series[key] = {{"fractions", xs}, {"accuracy", acc}, {"auroc", roc}};
  }
  json doc = {{"series", series},
              {"reference",
               {{"strategy", result.reference_strategy},
                {"accuracy", result.reference_accuracy},
                {"auroc", result.reference_auroc}}}};
  io::write_text_file(path, doc.dump(2) + "\n");
}

SweepResult read_sweep_csv(const std::filesystem::path& path) {
  std::istringstream in(io::read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty sweep csv " + path.string());
  SweepResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string strategy, fraction, seed, acc, roc;
    std::getline(row, strategy, ',');
    std::getline(row, fraction, ',');
    std::getline(row, seed, ',');
    std::getline(row, acc, ',');
    std::getline(row, roc, ',');
    result.cells.push_back({strategy_from_string(strategy), std::stod(fraction),
                            std::stoull(seed), std::stod(acc), std::stod(roc)});
  }
  for (const auto& c : result.cells) {
    if (std::find(result.fractions.begin(), result.fractions.end(), c.fraction) ==
        result.fractions.end())
      result.fractions.push_back(c.fraction);
    if (std::find(result.strategies.begin(), result.strategies.end(), c.strategy) ==
        result.strategies.end())
      result.strategies.push_back(c.strategy);
  }
  std::sort(result.fractions.begin(), result.fractions.end());
  return result;
}

}  // namespace evidx
