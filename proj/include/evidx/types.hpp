#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evidx/errors.hpp"

namespace evidx {

enum class Diagnosis { NC, MCI, AD };
enum class Sex { F, M };
enum class Direction { Atrophy, Enlargement };
enum class Severity { No, Mild, Severe };

std::string to_string(Diagnosis d);
std::string to_string(Sex s);
std::string to_string(Direction d);
std::string to_string(Severity s);
Diagnosis diagnosis_from_string(const std::string& s);
Sex sex_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);
Severity severity_from_string(const std::string& s);

struct GridShape {
  int d = 0, h = 0, w = 0;
  std::size_t voxels() const {
    return static_cast<std::size_t>(d) * h * w;
  }
  bool operator==(const GridShape&) const = default;
};

// Scalar intensity field, normalized to [0, 1].
struct VolumeGrid {
  GridShape shape;
  std::vector<float> data;  // shape.voxels() values, z-major

  void validate() const;
};

struct AtlasRegion {
  int code = 0;
  std::string name;
  Direction direction = Direction::Atrophy;
};

// Ordered region table. The first `k` regions are the disease-relevant
// subset used as model input and as auxiliary-label targets.
struct AtlasConfig {
  std::vector<AtlasRegion> regions;
  int k = 0;

  void validate() const;
  std::vector<int> k_codes() const;
  bool has_code(int code) const;
  const AtlasRegion& region(int code) const;
};

struct ParcellationMap {
  GridShape shape;
  std::vector<std::int32_t> labels;  // 0 = background

  void validate_against(const AtlasConfig& atlas) const;
};

struct ClinicalInfo {
  double age = 0.0;
  Sex sex = Sex::F;

  void validate() const;
};

struct SummaryMeasures {
  std::map<int, double> volume_mm3;
};

struct Case {
  std::string id;
  VolumeGrid volume;
  ParcellationMap parcellation;
  ClinicalInfo clinical;
  Diagnosis diagnosis = Diagnosis::NC;
  SummaryMeasures measures;
};

// Auxiliary-task ground truth: one severity per disease-relevant region.
struct MCLabelSet {
  std::map<int, Severity> labels;
};

using LabelMap = std::map<std::string, MCLabelSet>;

struct DatasetSplit {
  std::vector<std::string> train, val, test;
  std::uint64_t seed = 0;

  bool contains(const std::string& id) const;
};

inline void VolumeGrid::validate() const {
  if (shape.d < 8 || shape.h < 8 || shape.w < 8)
    throw ShapeError("volume dimensions must each be >= 8");
  if (data.size() != shape.voxels())
    throw ShapeError("volume data size does not match shape");
  for (float v : data) {
    if (!(v >= 0.0f && v <= 1.0f))
      throw Error("volume intensity outside [0,1] or non-finite");
  }
}

inline void AtlasConfig::validate() const {
  if (k < 0 || k > static_cast<int>(regions.size()))
    throw ConfigError("atlas k must be <= region count");
  std::map<int, int> seen;
  for (const auto& r : regions) {
    if (++seen[r.code] > 1)
      throw ConfigError("duplicate atlas region code " + std::to_string(r.code));
  }
}

inline std::vector<int> AtlasConfig::k_codes() const {
  std::vector<int> codes;
  codes.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) codes.push_back(regions[static_cast<std::size_t>(i)].code);
  return codes;
}

inline bool AtlasConfig::has_code(int code) const {
  for (const auto& r : regions)
    if (r.code == code) return true;
  return false;
}

inline const AtlasRegion& AtlasConfig::region(int code) const {
  for (const auto& r : regions)
    if (r.code == code) return r;
  throw MissingRegionError(code);
}

inline void ParcellationMap::validate_against(const AtlasConfig& atlas) const {
  if (labels.size() != shape.voxels())
    throw ShapeError("parcellation data size does not match shape");
  for (std::int32_t code : labels) {
    if (code != 0 && !atlas.has_code(code))
      throw Error("parcellation code " + std::to_string(code) + " missing from atlas");
  }
}

inline void ClinicalInfo::validate() const {
  if (!(age >= 18.0 && age <= 120.0))
    throw Error("age outside [18, 120]");
}

inline bool DatasetSplit::contains(const std::string& id) const {
  for (const auto* group : {&train, &val, &test})
    for (const auto& x : *group)
      if (x == id) return true;
  return false;
}

}  // namespace evidx
