#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evidx/model.hpp"
#include "evidx/types.hpp"

namespace evidx {

struct CounterfactualPair {
  std::string case_id;
  double p_orig = 0.0;
  double p_corrupt = 0.0;
  double dif = 0.0;  // |p_corrupt - p_orig|
};

struct CounterfactualResult {
  std::vector<CounterfactualPair> pairs;
  std::vector<long> histogram;  // fixed-width bins starting at zero
  double bin_width = 0.02;
  std::uint64_t noise_seed = 0;

  long first_bin() const { return histogram.empty() ? 0 : histogram.front(); }
};

// Adds Gaussian noise (sigma = noise_sigma * the volume's intensity standard
// deviation) to voxels inside Severe-labeled regions, clamped to [0,1].
// Voxels outside those regions are copied bit for bit. Returns nullopt when
// the case has no Severe region (ineligible for pairing).
std::optional<VolumeGrid> corrupt_case(const Case& c, const MCLabelSet& labels,
                                       double noise_sigma, std::uint64_t seed);

// Pairs every eligible case with its corrupted twin and histograms the
// per-pair prediction differences against the AD probability.
CounterfactualResult counterfactual_test(const Network& net,
                                         const std::vector<double>& params,
                                         const std::vector<const Case*>& cases,
                                         const AtlasConfig& atlas, const LabelMap& labels,
                                         double noise_sigma, std::uint64_t seed,
                                         double bin_width = 0.02);

void write_counterfactual_pairs_csv(const std::filesystem::path& path,
                                    const CounterfactualResult& result);
void write_counterfactual_histogram_csv(const std::filesystem::path& path,
                                        const CounterfactualResult& result);

}  // namespace evidx
