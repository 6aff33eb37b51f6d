#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evidx/types.hpp"

namespace evidx {

// Stratified 4:1:1 split over the NC/AD cases. MCI cases are never placed in
// any split; they feed the labeling threshold pool only. Split sizes follow
// the global rule train = floor(4N/6), val = floor(N/6), test = remainder,
// with per-class counts apportioned so each split stays within one case of
// the global class proportions. Pure function of (ids, classes, seed):
// input order does not matter.
DatasetSplit split_dataset(const std::vector<Case>& cases, std::uint64_t seed);

// Same contract, driven by an id -> diagnosis table instead of full cases.
DatasetSplit split_dataset(const std::map<std::string, Diagnosis>& diagnosis_by_id,
                           std::uint64_t seed);

// Stratified, nested subsampling for learning-curve runs: for a fixed seed
// the 25% subset is a prefix of the 50% subset, and so on. Returns ids
// sorted. Throws InsufficientDataError if any class would drop to zero.
std::vector<std::string> subsample_fraction(
    const std::vector<std::string>& ids,
    const std::map<std::string, Diagnosis>& diagnosis_by_id, double fraction,
    std::uint64_t seed);

std::map<std::string, Diagnosis> diagnosis_table(const std::vector<Case>& cases);

}  // namespace evidx
