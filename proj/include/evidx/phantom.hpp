#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evidx/types.hpp"

namespace evidx {

// One synthetic region: a ball- or box-like blob grown around a fixed
// anchor cell. Class effects scale its voxel count, never its position.
struct PhantomRegion {
  int code = 0;
  std::string name;
  Direction direction = Direction::Atrophy;
  bool relevant = true;     // member of the atlas's K subset
  int base_voxels = 0;      // count at factor 1.0
  double mean_intensity = 0.5;
  double factor_mci = 1.0;  // multiplicative volume factor per class (NC = 1)
  double factor_ad = 1.0;
};

struct AgeRange {
  double lo = 55.0;
  double hi = 85.0;
};

struct PhantomSpec {
  GridShape grid{32, 32, 32};
  double voxel_size_mm = 2.0;  // isotropic edge length; voxel volume = size^3
  std::vector<PhantomRegion> regions;  // relevant regions first
  double age_drift_per_decade = -0.03;         // atrophy-type and bystander regions
  double age_drift_enlarge_per_decade = 0.05;  // enlargement-type regions
  double reference_age = 65.0;
  double jitter_sigma = 0.08;           // lognormal per-case per-region scatter
  double case_scale_sigma = 0.0;        // lognormal whole-head size factor per case
  double intensity_noise_sigma = 0.06;  // additive voxel noise, clamped
  double background_intensity = 0.30;
  AgeRange age_nc{55, 85}, age_mci{55, 90}, age_ad{60, 90};
  std::uint64_t seed = 0;
  int n_nc = 0, n_mci = 0, n_ad = 0;  // default counts for dataset generation

  double voxel_volume_mm3() const {
    return voxel_size_mm * voxel_size_mm * voxel_size_mm;
  }
  void validate() const;
};

// Fourteen disease-relevant regions (eleven atrophy-type, three
// enlargement-type) plus four bystander regions on a 32^3 grid.
PhantomSpec default_phantom_spec();

AtlasConfig atlas_from_spec(const PhantomSpec& spec);

PhantomSpec phantom_spec_from_json_file(const std::filesystem::path& path);
void write_phantom_spec(const std::filesystem::path& path, const PhantomSpec& spec);

Case generate_case(const PhantomSpec& spec, const std::string& id, Diagnosis diagnosis,
                   const ClinicalInfo& clinical, std::uint64_t case_seed);

// Deterministic in (spec, counts); cases are independent given their derived
// per-case seeds, so generation order never changes the output.
std::vector<Case> generate_dataset(const PhantomSpec& spec, int n_nc, int n_mci, int n_ad);

}  // namespace evidx
