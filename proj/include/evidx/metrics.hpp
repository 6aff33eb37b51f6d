#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evidx/model.hpp"
#include "evidx/types.hpp"

namespace evidx {

struct MetricsReport {
  double accuracy = 0.0;
  double auroc = 0.0;
  long n_cases = 0;
  long n_nc = 0;
  long n_ad = 0;
  std::string strategy;
  std::uint64_t seed = 0;
};

// Fraction of cases whose argmax class matches the truth; an exactly tied
// detection distribution scores as NC.
double accuracy(const std::vector<Prediction>& predictions,
                const std::vector<Diagnosis>& truths);

// Rank-statistic AUROC with midrank tie handling: (concordant + 0.5 * tied)
// over (positives * negatives), computed from the tie-corrected rank sum.
double auroc(const std::vector<double>& scores, const std::vector<Diagnosis>& truths);

}  // namespace evidx
