#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evidx/types.hpp"

namespace evidx {

// Demographic stratum used for volume normalization. Bin index is
// floor(age / bin_width); with the default 10-year bins, ages 60-69 fall in
// bin 6.
struct GroupKey {
  int age_bin = 0;
  Sex sex = Sex::F;

  auto operator<=>(const GroupKey&) const = default;
  std::string str() const { return std::to_string(age_bin) + to_string(sex); }
};

constexpr double kDefaultAgeBinYears = 10.0;

GroupKey group_key(const ClinicalInfo& clinical, double bin_years = kDefaultAgeBinYears);

// Case ids per group, in input order. Every case lands in exactly one group.
std::map<GroupKey, std::vector<std::string>> group_cases(
    const std::vector<Case>& cases, double bin_years = kDefaultAgeBinYears);

// Per (group, region, diagnosis class) accumulators. Sums are taken in case
// input order so results are reproducible to the bit.
struct ClassAggregate {
  double sum = 0.0;
  long count = 0;
  bool defined() const { return count > 0; }
  double mean() const { return sum / double(count); }
};

struct CellStats {
  ClassAggregate nc, mci, ad;
  const ClassAggregate& of(Diagnosis d) const {
    switch (d) {
      case Diagnosis::NC: return nc;
      case Diagnosis::MCI: return mci;
      default: return ad;
    }
  }
};

struct GroupStats {
  // Keyed by (group, region code). Regions are the atlas's relevant subset.
  std::map<std::pair<GroupKey, int>, CellStats> cells;
  // Pooled over all groups, keyed by region code.
  std::map<int, CellStats> global;
};

GroupStats compute_group_statistics(
    const std::vector<Case>& cases,
    const std::map<GroupKey, std::vector<std::string>>& groups,
    const AtlasConfig& atlas);

enum class ThresholdSource { Group, GlobalFallback };

// Interval bounds for one (group, region). For atrophy t_sev < t_no and
// larger volumes are healthier; enlargement mirrors the ordering.
struct ThresholdPair {
  double t_no = 0.0;
  double t_sev = 0.0;
  Direction direction = Direction::Atrophy;
  ThresholdSource source = ThresholdSource::Group;
};

struct ThresholdTable {
  std::map<std::pair<GroupKey, int>, ThresholdPair> per_group;
  std::map<int, ThresholdPair> global;

  const ThresholdPair& lookup(const GroupKey& g, int region) const;
};

// Midpoint thresholds per (group, region): t_no from the NC and MCI class
// averages, t_sev from the AD and MCI class averages. Groups with a class
// count below min_group_size, or with inverted ordering, fall back to the
// pooled global thresholds. Inverted global ordering is unrecoverable and
// raises DegenerateStatisticsError.
ThresholdTable derive_thresholds(const GroupStats& stats, const AtlasConfig& atlas,
                                 int min_group_size);

// Strict comparisons; values equal to either bound are Mild.
Severity assign_label(double volume_mm3, const ThresholdPair& thresholds);

constexpr int kDefaultMinGroupSize = 10;

// Full annotation pass. Thresholds are derived from `threshold_pool` ids
// (all cases when empty); every case receives a label set covering exactly
// the atlas's relevant regions.
LabelMap label_dataset(const std::vector<Case>& cases, const AtlasConfig& atlas,
                       int min_group_size = kDefaultMinGroupSize,
                       const std::vector<std::string>& threshold_pool = {},
                       double bin_years = kDefaultAgeBinYears);

// Audit trail: CSV of (group, region, direction, t_no, t_sev, source).
void write_threshold_report(const std::filesystem::path& path, const ThresholdTable& table);

}  // namespace evidx
