#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evidx/train.hpp"

namespace evidx {

struct SweepCell {
  Strategy strategy;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double auroc = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<double> fractions;
  std::vector<Strategy> strategies;
  // Reference line: the best baseline given all the training data.
  double reference_accuracy = 0.0;
  double reference_auroc = 0.0;
  std::string reference_strategy;
};

// One training run per (strategy, fraction, seed). Subsets are stratified
// and nested across fractions. A random-init baseline at fraction 1.0 is
// added when absent so the reference line is always defined.
SweepResult data_efficiency_sweep(const std::vector<Case>& cases,
                                  const AtlasConfig& atlas, const LabelMap& labels,
                                  const TrainConfig& base,
                                  const std::vector<Strategy>& strategies,
                                  const std::vector<double>& fractions,
                                  const std::vector<std::uint64_t>& seeds);

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);
void write_sweep_plotdata(const std::filesystem::path& path, const SweepResult& result);
SweepResult read_sweep_csv(const std::filesystem::path& path);

}  // namespace evidx
