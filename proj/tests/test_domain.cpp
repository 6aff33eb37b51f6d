#include "doctest.h"

#include <algorithm>
#include <set>

#include "evidx/io.hpp"
#include "evidx/mask.hpp"
#include "evidx/phantom.hpp"
#include "evidx/rng.hpp"
#include "evidx/split.hpp"
#include "test_support.hpp"

using namespace evidx;

namespace {

std::map<std::string, Diagnosis> synth_table(int n_nc, int n_ad) {
  std::map<std::string, Diagnosis> table;
  for (int i = 0; i < n_nc; ++i) table["nc" + std::to_string(1000 + i)] = Diagnosis::NC;
  for (int i = 0; i < n_ad; ++i) table["ad" + std::to_string(1000 + i)] = Diagnosis::AD;
  return table;
}

long count_class(const std::vector<std::string>& ids,
                 const std::map<std::string, Diagnosis>& table, Diagnosis d) {
  long n = 0;
  for (const auto& id : ids)
    if (table.at(id) == d) ++n;
  return n;
}

}  // namespace

TEST_CASE("split: six cases produce 4/1/1 with stratification within one case") {
  auto table = synth_table(3, 3);
  DatasetSplit split = split_dataset(table, 0);
  CHECK(split.train.size() == 4);
  CHECK(split.val.size() == 1);
  CHECK(split.test.size() == 1);
  CHECK(count_class(split.train, table, Diagnosis::NC) == 2);
  CHECK(count_class(split.train, table, Diagnosis::AD) == 2);
}

TEST_CASE("split: 4520-case mixture lands on 3013/753/754") {
  auto table = synth_table(2781, 1739);
  DatasetSplit split = split_dataset(table, 3);
  CHECK(split.train.size() == 3013);
  CHECK(split.val.size() == 753);
  CHECK(split.test.size() == 754);
  // per-class counts stay within one case of the proportional ideal
  const double p_nc = 2781.0 / 4520.0;
  CHECK(std::abs(double(count_class(split.train, table, Diagnosis::NC)) -
                 p_nc * 3013.0) <= 1.0);
  CHECK(std::abs(double(count_class(split.val, table, Diagnosis::NC)) - p_nc * 753.0) <=
        1.0);
  CHECK(std::abs(double(count_class(split.test, table, Diagnosis::NC)) - p_nc * 754.0) <=
        1.0);
}

TEST_CASE("split: disjoint, exhaustive, deterministic, seed-sensitive") {
  auto table = synth_table(40, 25);
  DatasetSplit a = split_dataset(table, 0);
  DatasetSplit b = split_dataset(table, 0);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);

  std::set<std::string> seen;
  for (const auto* part : {&a.train, &a.val, &a.test})
    for (const auto& id : *part) CHECK(seen.insert(id).second);
  CHECK(seen.size() == table.size());

  DatasetSplit c = split_dataset(table, 1);
  CHECK(c.train.size() == a.train.size());
  CHECK(c.val.size() == a.val.size());
  CHECK(c.train != a.train);
}

TEST_CASE("split: membership is independent of input order") {
  PhantomSpec spec = support::small_phantom_spec();
  auto cases = generate_dataset(spec, 10, 4, 8);
  DatasetSplit forward = split_dataset(cases, 5);
  std::reverse(cases.begin(), cases.end());
  DatasetSplit reversed = split_dataset(cases, 5);
  CHECK(forward.train == reversed.train);
  CHECK(forward.val == reversed.val);
  CHECK(forward.test == reversed.test);
}

TEST_CASE("split: MCI never enters any split") {
  PhantomSpec spec = support::small_phantom_spec();
  auto cases = generate_dataset(spec, 8, 6, 8);
  DatasetSplit split = split_dataset(cases, 0);
  for (const auto* part : {&split.train, &split.val, &split.test})
    for (const auto& id : *part) CHECK(id.rfind("mci", 0) != 0);
  CHECK(split.train.size() + split.val.size() + split.test.size() == 16);
}

TEST_CASE("split: too little data raises") {
  auto five = synth_table(4, 1);
  CHECK_THROWS_AS(split_dataset(five, 0), InsufficientDataError);
  auto one_sided = synth_table(9, 0);
  CHECK_THROWS_AS(split_dataset(one_sided, 0), InsufficientDataError);
}

TEST_CASE("subsample: stratified, nested, floor-sized") {
  auto table = synth_table(40, 20);
  std::vector<std::string> ids;
  for (const auto& [id, d] : table) ids.push_back(id);
  auto q25 = subsample_fraction(ids, table, 0.25, 9);
  auto q50 = subsample_fraction(ids, table, 0.5, 9);
  auto q75 = subsample_fraction(ids, table, 0.75, 9);
  auto q100 = subsample_fraction(ids, table, 1.0, 9);
  CHECK(q25.size() == 15);  // 10 NC + 5 AD
  CHECK(count_class(q25, table, Diagnosis::AD) == 5);
  CHECK(q100.size() == 60);
  CHECK(std::includes(q50.begin(), q50.end(), q25.begin(), q25.end()));
  CHECK(std::includes(q75.begin(), q75.end(), q50.begin(), q50.end()));
  CHECK(std::includes(q100.begin(), q100.end(), q75.begin(), q75.end()));

  auto tiny = synth_table(8, 2);
  std::vector<std::string> tiny_ids;
  for (const auto& [id, d] : tiny) tiny_ids.push_back(id);
  CHECK_THROWS_AS(subsample_fraction(tiny_ids, tiny, 0.25, 0), InsufficientDataError);
}

TEST_CASE("mask: identity when all voxels lie inside relevant regions") {
  AtlasConfig atlas = support::two_region_atlas();
  Case c = support::light_case("a", Diagnosis::NC, 70, Sex::F, {{1, 5.0}, {2, 7.0}});
  for (std::size_t i = 0; i < c.parcellation.labels.size(); ++i) {
    c.parcellation.labels[i] = i % 2 == 0 ? 1 : 2;
    c.volume.data[i] = float(i % 97) / 97.0f;
  }
  VolumeGrid masked = mask_to_k_regions(c, atlas);
  CHECK(masked.data == c.volume.data);
}

TEST_CASE("mask: all-zero output when no voxel belongs to a relevant region") {
  AtlasConfig atlas = support::two_region_atlas();
  Case c = support::light_case("a", Diagnosis::NC, 70, Sex::F, {{1, 5.0}, {2, 7.0}});
  for (auto& v : c.volume.data) v = 0.5f;
  VolumeGrid masked = mask_to_k_regions(c, atlas);
  for (float v : masked.data) CHECK(v == 0.0f);
}

TEST_CASE("mask: keeps exactly the voxels of relevant regions") {
  // region 3 occupies a known block; only relevant-region voxels survive
  AtlasConfig atlas;
  atlas.regions = {{3, "kept", Direction::Atrophy},
                   {4, "kept_too", Direction::Atrophy},
                   {9, "dropped", Direction::Atrophy}};
  atlas.k = 2;
  Case c = support::light_case("a", Diagnosis::NC, 70, Sex::F,
                               {{3, 64.0}, {4, 10.0}, {9, 30.0}});
  for (std::size_t i = 0; i < 64; ++i) c.parcellation.labels[i] = 3;
  for (std::size_t i = 64; i < 74; ++i) c.parcellation.labels[i] = 4;
  for (std::size_t i = 74; i < 104; ++i) c.parcellation.labels[i] = 9;
  for (auto& v : c.volume.data) v = 0.25f;
  VolumeGrid masked = mask_to_k_regions(c, atlas);

  long nonzero = 0;
  for (float v : masked.data) nonzero += v != 0.0f;
  // independent scan of the parcellation map
  long expected = 0;
  for (std::int32_t code : c.parcellation.labels) expected += code == 3 || code == 4;
  CHECK(nonzero == expected);
  CHECK(expected == 74);

  SUBCASE("idempotent") {
    Case twice = c;
    twice.volume = masked;
    VolumeGrid again = mask_to_k_regions(twice, atlas);
    CHECK(again.data == masked.data);
  }
}

TEST_CASE("mask: requested region missing from the case raises MissingRegion") {
  AtlasConfig atlas = support::two_region_atlas();
  Case c = support::light_case("a", Diagnosis::NC, 70, Sex::F, {{1, 5.0}});  // region 2 absent
  try {
    mask_to_k_regions(c, atlas);
    FAIL("expected MissingRegionError");
  } catch (const MissingRegionError& e) {
    CHECK(e.code == 2);
  }
}

TEST_CASE("volume and atlas files round-trip") {
  auto dir = support::fresh_temp_dir("io");
  VolumeGrid v;
  v.shape = {8, 9, 10};
  v.data.resize(v.shape.voxels());
  Rng rng(1);
  for (auto& x : v.data) x = float(rng.uniform());
  io::write_volume(dir / "v.bin", v);
  VolumeGrid u = io::read_volume(dir / "v.bin");
  CHECK(u.shape == v.shape);
  CHECK(u.data == v.data);

  AtlasConfig atlas = support::two_region_atlas();
  io::write_atlas(dir / "atlas.json", atlas);
  AtlasConfig back = io::read_atlas(dir / "atlas.json");
  CHECK(back.k == atlas.k);
  CHECK(back.regions.size() == atlas.regions.size());
  CHECK(back.regions[1].direction == Direction::Enlargement);
  std::filesystem::remove_all(dir);
}

TEST_CASE("case datasets round-trip field-for-field") {
  PhantomSpec spec = support::small_phantom_spec();
  auto cases = generate_dataset(spec, 3, 2, 3);
  auto dir = support::fresh_temp_dir("dataset");
  io::write_dataset(dir, cases, atlas_from_spec(spec));
  auto back = io::read_dataset(dir);
  REQUIRE(back.size() == cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CHECK(back[i].id == cases[i].id);
    CHECK(back[i].diagnosis == cases[i].diagnosis);
    CHECK(back[i].clinical.age == doctest::Approx(cases[i].clinical.age).epsilon(1e-12));
    CHECK(back[i].clinical.sex == cases[i].clinical.sex);
    CHECK(back[i].volume.data == cases[i].volume.data);
    CHECK(back[i].parcellation.labels == cases[i].parcellation.labels);
    CHECK(back[i].measures.volume_mm3 == cases[i].measures.volume_mm3);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("labels file round-trips") {
  auto dir = support::fresh_temp_dir("labels");
  LabelMap labels;
  labels["a"].labels = {{1, Severity::No}, {2, Severity::Severe}};
  labels["b"].labels = {{1, Severity::Mild}, {2, Severity::No}};
  io::write_labels(dir / "labels.json", labels);
  LabelMap back = io::read_labels(dir / "labels.json");
  CHECK(back.size() == 2);
  CHECK(back["a"].labels.at(2) == Severity::Severe);
  CHECK(back["b"].labels.at(1) == Severity::Mild);
  std::filesystem::remove_all(dir);
}

TEST_CASE("grid invariants reject bad volumes") {
  VolumeGrid v;
  v.shape = {4, 8, 8};
  v.data.assign(v.shape.voxels(), 0.5f);
  CHECK_THROWS_AS(v.validate(), ShapeError);
  v.shape = {8, 8, 8};
  v.data.assign(v.shape.voxels(), 1.5f);
  CHECK_THROWS_AS(v.validate(), Error);
  v.data.assign(v.shape.voxels(), 0.5f);
  CHECK_NOTHROW(v.validate());
}
