#include "doctest.h"

#include <cmath>

#include "evidx/io.hpp"
#include "evidx/labeler.hpp"
#include "evidx/phantom.hpp"
#include "test_support.hpp"

using namespace evidx;

namespace {

PhantomSpec flat_spec() {
  PhantomSpec spec = support::small_phantom_spec();
  for (auto& r : spec.regions) {
    r.factor_mci = 1.0;
    r.factor_ad = 1.0;
  }
  spec.jitter_sigma = 0.0;
  spec.case_scale_sigma = 0.0;
  spec.age_drift_per_decade = 0.0;
  spec.age_drift_enlarge_per_decade = 0.0;
  return spec;
}

}  // namespace

TEST_CASE("identity effects give identical volumes across classes") {
  PhantomSpec spec = flat_spec();
  Case nc = generate_case(spec, "nc", Diagnosis::NC, {70, Sex::F}, 1);
  Case mci = generate_case(spec, "mci", Diagnosis::MCI, {55, Sex::M}, 2);
  Case ad = generate_case(spec, "ad", Diagnosis::AD, {85, Sex::F}, 3);
  CHECK(nc.measures.volume_mm3 == mci.measures.volume_mm3);
  CHECK(nc.measures.volume_mm3 == ad.measures.volume_mm3);
}

TEST_CASE("a 0.5 class factor halves the region volume up to one voxel") {
  PhantomSpec spec = flat_spec();
  spec.regions[0].factor_ad = 0.5;
  Case nc = generate_case(spec, "nc", Diagnosis::NC, {70, Sex::F}, 1);
  Case ad = generate_case(spec, "ad", Diagnosis::AD, {70, Sex::F}, 1);
  const int code = spec.regions[0].code;
  const double vox = spec.voxel_volume_mm3();
  CHECK(std::abs(ad.measures.volume_mm3.at(code) - 0.5 * nc.measures.volume_mm3.at(code)) <=
        vox);
  // other regions untouched
  CHECK(ad.measures.volume_mm3.at(spec.regions[1].code) ==
        nc.measures.volume_mm3.at(spec.regions[1].code));
}

TEST_CASE("measures equal voxel count times voxel volume, exactly") {
  PhantomSpec spec = support::small_phantom_spec();
  auto cases = generate_dataset(spec, 4, 2, 4);
  for (const auto& c : cases) {
    std::map<int, long> counts;
    for (std::int32_t code : c.parcellation.labels)
      if (code != 0) counts[int(code)] += 1;
    REQUIRE(counts.size() == spec.regions.size());
    for (const auto& [code, n] : counts)
      CHECK(c.measures.volume_mm3.at(code) == double(n) * spec.voxel_volume_mm3());
  }
}

TEST_CASE("dataset generation is deterministic and order-stable") {
  PhantomSpec spec = support::small_phantom_spec();
  auto a = generate_dataset(spec, 6, 3, 5);
  auto b = generate_dataset(spec, 6, 3, 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].volume.data == b[i].volume.data);
    CHECK(a[i].parcellation.labels == b[i].parcellation.labels);
    CHECK(a[i].measures.volume_mm3 == b[i].measures.volume_mm3);
    CHECK(a[i].clinical.age == b[i].clinical.age);
  }
  CHECK(generate_dataset(spec, 0, 0, 0).empty());

  SUBCASE("bitwise-identical manifests") {
    auto d1 = support::fresh_temp_dir("ph1");
    auto d2 = support::fresh_temp_dir("ph2");
    io::write_dataset(d1, a, atlas_from_spec(spec));
    io::write_dataset(d2, b, atlas_from_spec(spec));
    CHECK(io::read_text_file(d1 / "manifest.jsonl") ==
          io::read_text_file(d2 / "manifest.jsonl"));
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
  }
}

TEST_CASE("volumes stay inside [0,1] and validate") {
  PhantomSpec spec = support::small_phantom_spec();
  spec.intensity_noise_sigma = 0.5;  // drive values into the clamp
  auto cases = generate_dataset(spec, 3, 0, 3);
  for (const auto& c : cases) CHECK_NOTHROW(c.volume.validate());
}

TEST_CASE("region overflow raises") {
  PhantomSpec spec = support::small_phantom_spec();
  spec.regions[0].base_voxels = 4000;  // cannot fit its lattice cell
  CHECK_THROWS_AS(generate_case(spec, "x", Diagnosis::NC, {70, Sex::F}, 1),
                  PhantomSpecError);
  CHECK_THROWS_AS(generate_dataset(spec, 2, 0, 2), PhantomSpecError);
}

TEST_CASE("labeling recovers the generator's class intent") {
  PhantomSpec spec = default_phantom_spec();
  spec.seed = 12;
  auto cases = generate_dataset(spec, 200, 100, 150);
  LabelMap labels = label_dataset(cases, atlas_from_spec(spec));
  long ad_atrophy_flagged = 0, ad_atrophy_total = 0;
  for (const auto& c : cases) {
    if (c.diagnosis != Diagnosis::AD) continue;
    for (const auto& r : spec.regions) {
      if (!r.relevant || r.direction != Direction::Atrophy) continue;
      const Severity s = labels.at(c.id).labels.at(r.code);
      ad_atrophy_total += 1;
      ad_atrophy_flagged += s != Severity::No;
    }
  }
  // well-separated class factors: at least 90% of AD atrophy labels flagged
  CHECK(double(ad_atrophy_flagged) / double(ad_atrophy_total) >= 0.90);
}

TEST_CASE("wider class separation raises a linear probe's accuracy") {
  auto probe_accuracy = [](double ad_factor) {
    PhantomSpec spec = support::small_phantom_spec(31);
    for (auto& r : spec.regions) {
      if (!r.relevant) continue;
      if (r.direction == Direction::Atrophy) r.factor_ad = ad_factor;
      else r.factor_ad = 2.0 - ad_factor;
    }
    spec.jitter_sigma = 0.18;
    auto cases = generate_dataset(spec, 120, 0, 120);
    // one-dimensional probe on summed relevant-region volume, midpoint rule
    double mean_nc = 0.0, mean_ad = 0.0;
    auto total = [&](const Case& c) {
      double t = 0.0;
      for (const auto& r : spec.regions) {
        if (!r.relevant) continue;
        double v = c.measures.volume_mm3.at(r.code);
        t += r.direction == Direction::Atrophy ? v : -v;
      }
      return t;
    };
    for (const auto& c : cases)
      (c.diagnosis == Diagnosis::NC ? mean_nc : mean_ad) += total(c) / 120.0;
    const double cut = (mean_nc + mean_ad) / 2.0;
    long correct = 0;
    for (const auto& c : cases) {
      const bool call_ad = total(c) < cut;
      correct += call_ad == (c.diagnosis == Diagnosis::AD);
    }
    return double(correct) / double(cases.size());
  };
  const double weak = probe_accuracy(0.97);
  const double medium = probe_accuracy(0.85);
  const double strong = probe_accuracy(0.65);
  CHECK(weak <= medium);
  CHECK(medium <= strong);
  CHECK(strong > 0.9);
}

TEST_CASE("phantom spec files round-trip") {
  PhantomSpec spec = support::small_phantom_spec();
  spec.n_nc = 5;
  spec.n_ad = 4;
  auto dir = support::fresh_temp_dir("spec");
  write_phantom_spec(dir / "spec.json", spec);
  PhantomSpec back = phantom_spec_from_json_file(dir / "spec.json");
  CHECK(back.grid == spec.grid);
  CHECK(back.regions.size() == spec.regions.size());
  CHECK(back.regions[0].base_voxels == spec.regions[0].base_voxels);
  CHECK(back.seed == spec.seed);
  CHECK(back.n_nc == 5);
  auto a = generate_dataset(spec, 3, 1, 2);
  auto b = generate_dataset(back, 3, 1, 2);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].volume.data == b[i].volume.data);
  std::filesystem::remove_all(dir);
}
