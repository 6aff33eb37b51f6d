#include "evidx/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "evidx/io.hpp"
#include "evidx/rng.hpp"

namespace evidx {

using nlohmann::json;

void PhantomSpec::validate() const {
  if (grid.d < 8 || grid.h < 8 || grid.w < 8)
    throw ConfigError("phantom grid dimensions must each be >= 8");
  if (voxel_size_mm <= 0.0) throw ConfigError("voxel_size_mm must be positive");
  if (regions.empty()) throw ConfigError("phantom spec needs at least one region");
  if (regions.size() > 64)
    throw ConfigError("at most 64 phantom regions fit the anchor lattice");
  if (jitter_sigma < 0.0 || intensity_noise_sigma < 0.0)
    throw ConfigError("noise parameters must be non-negative");
  for (const auto& r : regions) {
    if (r.base_voxels < 1)
      throw ConfigError("region " + r.name + " base_voxels must be >= 1");
    if (r.factor_mci <= 0.0 || r.factor_ad <= 0.0)
      throw ConfigError("region " + r.name + " class factors must be positive");
  }
  bool relevant_prefix_done = false;
  for (const auto& r : regions) {
    if (!r.relevant) relevant_prefix_done = true;
    else if (relevant_prefix_done)
      throw ConfigError("relevant regions must precede bystander regions");
  }
}

PhantomSpec default_phantom_spec() {
  PhantomSpec spec;
  auto atrophy = [](int code, const char* name, int base, double intensity) {
    return PhantomRegion{code, name, Direction::Atrophy, true, base, intensity, 0.82, 0.64};
  };
  auto enlargement = [](int code, const char* name, int base, double intensity) {
    return PhantomRegion{code, name, Direction::Enlargement, true, base, intensity, 1.18, 1.45};
  };
  auto bystander = [](int code, const char* name, int base, double intensity) {
    return PhantomRegion{code, name, Direction::Atrophy, false, base, intensity, 1.0, 1.0};
  };
  spec.regions = {
      atrophy(101, "hippocampus_l", 180, 0.62),
      atrophy(102, "hippocampus_r", 176, 0.60),
      atrophy(103, "entorhinal_l", 150, 0.55),
      atrophy(104, "entorhinal_r", 148, 0.57),
      atrophy(105, "amygdala_l", 140, 0.66),
      atrophy(106, "amygdala_r", 138, 0.64),
      atrophy(107, "parahippocampal_l", 160, 0.52),
      atrophy(108, "parahippocampal_r", 158, 0.53),
      atrophy(109, "precuneus_l", 200, 0.58),
      atrophy(110, "precuneus_r", 196, 0.59),
      atrophy(111, "posterior_cingulate", 170, 0.61),
      enlargement(112, "lateral_ventricle_l", 120, 0.18),
      enlargement(113, "lateral_ventricle_r", 118, 0.17),
      enlargement(114, "third_ventricle", 90, 0.16),
      bystander(201, "brainstem", 120, 0.48),
      bystander(202, "cerebellum_l", 110, 0.50),
      bystander(203, "cerebellum_r", 108, 0.50),
      bystander(204, "thalamus", 100, 0.56),
  };
  return spec;
}

AtlasConfig atlas_from_spec(const PhantomSpec& spec) {
  AtlasConfig atlas;
  for (const auto& r : spec.regions) {
    atlas.regions.push_back({r.code, r.name, r.direction});
    if (r.relevant) ++atlas.k;
  }
  atlas.validate();
  return atlas;
}

namespace {

struct Cell {
  int z0, y0, x0, dz, dy, dx;
  std::size_t capacity() const { return std::size_t(dz) * dy * dx; }
};

// Regions live in disjoint cells of a 4x4x4 lattice over the grid, visited
// with a stride that spreads consecutive regions apart.
Cell cell_for_region(const GridShape& grid, std::size_t region_index) {
  constexpr int lattice = 4;
  constexpr std::size_t stride = 7;  // coprime with 64
  std::size_t cell_id = (region_index * stride) % (lattice * lattice * lattice);
  int cz = int(cell_id / (lattice * lattice));
  int cy = int((cell_id / lattice) % lattice);
  int cx = int(cell_id % lattice);
  auto span = [](int extent, int idx) {
    int lo = extent * idx / lattice;
    int hi = extent * (idx + 1) / lattice;
    return std::pair<int, int>{lo, hi - lo};
  };
  auto [z0, dz] = span(grid.d, cz);
  auto [y0, dy] = span(grid.h, cy);
  auto [x0, dx] = span(grid.w, cx);
  return Cell{z0, y0, x0, dz, dy, dx};
}

// Voxels of the cell ordered by distance from its center, so taking a
// prefix of length n yields a compact blob of exactly n voxels. Even region
// codes grow ball-like (Euclidean), odd ones box-like (Chebyshev).
std::vector<std::size_t> cell_growth_order(const GridShape& grid, const Cell& cell,
                                           int region_code) {
  const double cz = cell.z0 + (cell.dz - 1) / 2.0;
  const double cy = cell.y0 + (cell.dy - 1) / 2.0;
  const double cx = cell.x0 + (cell.dx - 1) / 2.0;
  struct Entry {
    double key;
    std::size_t flat;
  };
  std::vector<Entry> entries;
  entries.reserve(cell.capacity());
  for (int z = cell.z0; z < cell.z0 + cell.dz; ++z)
    for (int y = cell.y0; y < cell.y0 + cell.dy; ++y)
      for (int x = cell.x0; x < cell.x0 + cell.dx; ++x) {
        double az = std::abs(z - cz), ay = std::abs(y - cy), ax = std::abs(x - cx);
        double key = (region_code % 2 == 0) ? az * az + ay * ay + ax * ax
                                            : std::max({az, ay, ax});
        entries.push_back({key, (std::size_t(z) * grid.h + y) * grid.w + x});
      }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) {
                     if (a.key != b.key) return a.key < b.key;
                     return a.flat < b.flat;
                   });
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) order[i] = entries[i].flat;
  return order;
}

double class_factor(const PhantomRegion& r, Diagnosis d) {
  switch (d) {
    case Diagnosis::NC: return 1.0;
    case Diagnosis::MCI: return r.factor_mci;
    default: return r.factor_ad;
  }
}

}  // namespace

Case generate_case(const PhantomSpec& spec, const std::string& id, Diagnosis diagnosis,
                   const ClinicalInfo& clinical, std::uint64_t case_seed) {
  spec.validate();
  clinical.validate();
  Case c;
  c.id = id;
  c.diagnosis = diagnosis;
  c.clinical = clinical;
  c.parcellation.shape = spec.grid;
  c.parcellation.labels.assign(spec.grid.voxels(), 0);
  c.volume.shape = spec.grid;
  c.volume.data.assign(spec.grid.voxels(), 0.0f);

  const double decades = (clinical.age - spec.reference_age) / 10.0;
  const double age_shrink = std::pow(1.0 + spec.age_drift_per_decade, decades);
  const double age_grow = std::pow(1.0 + spec.age_drift_enlarge_per_decade, decades);
  const double voxel_vol = spec.voxel_volume_mm3();

  Rng jitter_rng(mix_seed(case_seed, "jitter"));
  const double head_scale = std::exp(jitter_rng.gaussian() * spec.case_scale_sigma);
  std::vector<double> region_mean(spec.grid.voxels(), spec.background_intensity);
  for (std::size_t ri = 0; ri < spec.regions.size(); ++ri) {
    const PhantomRegion& r = spec.regions[ri];
    const double jitter = std::exp(jitter_rng.gaussian() * spec.jitter_sigma);
    const double age_factor =
        r.direction == Direction::Enlargement ? age_grow : age_shrink;
    const double target = r.base_voxels * class_factor(r, diagnosis) * age_factor *
                          head_scale * jitter;
    long count = std::max(1L, std::lround(target));
    const Cell cell = cell_for_region(spec.grid, ri);
    if (std::size_t(count) > cell.capacity())
      throw PhantomSpecError("region " + r.name + " needs " + std::to_string(count) +
                             " voxels but its cell holds " +
                             std::to_string(cell.capacity()));
    const auto order = cell_growth_order(spec.grid, cell, r.code);
    for (long i = 0; i < count; ++i) {
      c.parcellation.labels[order[std::size_t(i)]] = r.code;
      region_mean[order[std::size_t(i)]] = r.mean_intensity;
    }
    c.measures.volume_mm3[r.code] = double(count) * voxel_vol;
  }

  Rng noise_rng(mix_seed(case_seed, "intensity"));
  for (std::size_t i = 0; i < c.volume.data.size(); ++i) {
    double v = region_mean[i] + spec.intensity_noise_sigma * noise_rng.gaussian();
    c.volume.data[i] = float(std::clamp(v, 0.0, 1.0));
  }
  return c;
}

std::vector<Case> generate_dataset(const PhantomSpec& spec, int n_nc, int n_mci, int n_ad) {
  spec.validate();
  if (n_nc < 0 || n_mci < 0 || n_ad < 0) throw ConfigError("case counts must be >= 0");
  const int total = n_nc + n_mci + n_ad;
  std::vector<Case> cases;
  cases.resize(std::size_t(total));

  auto class_of = [&](int i) {
    if (i < n_nc) return Diagnosis::NC;
    if (i < n_nc + n_mci) return Diagnosis::MCI;
    return Diagnosis::AD;
  };
  auto id_of = [&](int i, Diagnosis d) {
    int local = d == Diagnosis::NC ? i : d == Diagnosis::MCI ? i - n_nc : i - n_nc - n_mci;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%05d", d == Diagnosis::NC ? "nc" : d == Diagnosis::MCI ? "mci" : "ad",
                  local);
    return std::string(buf);
  };
  auto age_range = [&](Diagnosis d) {
    return d == Diagnosis::NC ? spec.age_nc : d == Diagnosis::MCI ? spec.age_mci : spec.age_ad;
  };

  std::string failure;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < total; ++i) {
    try {
      const Diagnosis d = class_of(i);
      const std::uint64_t case_seed = mix_seed(spec.seed, std::uint64_t(i));
      Rng clin_rng(mix_seed(case_seed, "clinical"));
      ClinicalInfo clinical;
      const AgeRange range = age_range(d);
      clinical.age = clin_rng.uniform(range.lo, range.hi);
      clinical.sex = clin_rng.below(2) == 0 ? Sex::F : Sex::M;
      cases[std::size_t(i)] = generate_case(spec, id_of(i, d), d, clinical, case_seed);
    } catch (const std::exception& e) {
#pragma omp critical
      failure = e.what();
    }
  }
  if (!failure.empty()) throw PhantomSpecError(failure);
  return cases;
}

namespace {

json region_to_json(const PhantomRegion& r) {
  return json{{"code", r.code},
              {"name", r.name},
              {"direction", to_string(r.direction)},
              {"relevant", r.relevant},
              {"base_voxels", r.base_voxels},
              {"mean_intensity", r.mean_intensity},
              {"factor_mci", r.factor_mci},
              {"factor_ad", r.factor_ad}};
}

PhantomRegion region_from_json(const json& j) {
  PhantomRegion r;
  r.code = j.at("code").get<int>();
  r.name = j.at("name").get<std::string>();
  r.direction = direction_from_string(j.at("direction").get<std::string>());
  r.relevant = j.value("relevant", true);
  r.base_voxels = j.at("base_voxels").get<int>();
  r.mean_intensity = j.value("mean_intensity", 0.5);
  r.factor_mci = j.value("factor_mci", 1.0);
  r.factor_ad = j.value("factor_ad", 1.0);
  return r;
}

}  // namespace

void write_phantom_spec(const std::filesystem::path& path, const PhantomSpec& spec) {
  json regions = json::array();
  for (const auto& r : spec.regions) regions.push_back(region_to_json(r));
  json doc = {{"grid", {spec.grid.d, spec.grid.h, spec.grid.w}},
              {"voxel_size_mm", spec.voxel_size_mm},
              {"regions", regions},
              {"age_drift_per_decade", spec.age_drift_per_decade},
              {"age_drift_enlarge_per_decade", spec.age_drift_enlarge_per_decade},
              {"reference_age", spec.reference_age},
              {"jitter_sigma", spec.jitter_sigma},
              {"case_scale_sigma", spec.case_scale_sigma},
              {"intensity_noise_sigma", spec.intensity_noise_sigma},
              {"background_intensity", spec.background_intensity},
              {"age_nc", {spec.age_nc.lo, spec.age_nc.hi}},
              {"age_mci", {spec.age_mci.lo, spec.age_mci.hi}},
              {"age_ad", {spec.age_ad.lo, spec.age_ad.hi}},
              {"seed", spec.seed},
              {"n_nc", spec.n_nc},
              {"n_mci", spec.n_mci},
              {"n_ad", spec.n_ad}};
  io::write_text_file(path, doc.dump(2) + "\n");
}

PhantomSpec phantom_spec_from_json_file(const std::filesystem::path& path) {
  json doc = json::parse(io::read_text_file(path));
  PhantomSpec spec = default_phantom_spec();
  if (doc.contains("grid")) {
    auto g = doc.at("grid");
    spec.grid = {g.at(0).get<int>(), g.at(1).get<int>(), g.at(2).get<int>()};
  }
  if (doc.contains("regions")) {
    spec.regions.clear();
    for (const auto& r : doc.at("regions")) spec.regions.push_back(region_from_json(r));
  }
  spec.voxel_size_mm = doc.value("voxel_size_mm", spec.voxel_size_mm);
  spec.age_drift_per_decade = doc.value("age_drift_per_decade", spec.age_drift_per_decade);
  spec.age_drift_enlarge_per_decade =
      doc.value("age_drift_enlarge_per_decade", spec.age_drift_enlarge_per_decade);
  spec.reference_age = doc.value("reference_age", spec.reference_age);
  spec.jitter_sigma = doc.value("jitter_sigma", spec.jitter_sigma);
  spec.case_scale_sigma = doc.value("case_scale_sigma", spec.case_scale_sigma);
  spec.intensity_noise_sigma = doc.value("intensity_noise_sigma", spec.intensity_noise_sigma);
  spec.background_intensity = doc.value("background_intensity", spec.background_intensity);
  auto range = [&](const char* key, AgeRange fallback) {
    if (!doc.contains(key)) return fallback;
    return AgeRange{doc.at(key).at(0).get<double>(), doc.at(key).at(1).get<double>()};
  };
  spec.age_nc = range("age_nc", spec.age_nc);
  spec.age_mci = range("age_mci", spec.age_mci);
  spec.age_ad = range("age_ad", spec.age_ad);
  spec.seed = doc.value("seed", spec.seed);
  spec.n_nc = doc.value("n_nc", spec.n_nc);
  spec.n_mci = doc.value("n_mci", spec.n_mci);
  spec.n_ad = doc.value("n_ad", spec.n_ad);
  spec.validate();
  return spec;
}

}  // namespace evidx
