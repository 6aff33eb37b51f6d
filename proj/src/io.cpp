#include "evidx/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace evidx::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

void write_array_file(const fs::path& path, const GridShape& shape,
                      const char* dtype, const void* data, std::size_t bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  json header = {{"shape", {shape.d, shape.h, shape.w}}, {"dtype", dtype}};
  out << header.dump() << '\n';
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw IoError("write failed for " + path.string());
}

GridShape read_array_header(std::ifstream& in, const fs::path& path,
                            const char* expected_dtype) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing header in " + path.string());
  json header = json::parse(line);
  if (header.at("dtype").get<std::string>() != expected_dtype)
    throw IoError(path.string() + ": expected dtype " + expected_dtype);
  auto s = header.at("shape");
  return GridShape{s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>()};
}

}  // namespace

void write_volume(const fs::path& path, const VolumeGrid& v) {
  write_array_file(path, v.shape, "float32", v.data.data(), v.data.size() * sizeof(float));
}

VolumeGrid read_volume(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  VolumeGrid v;
  v.shape = read_array_header(in, path, "float32");
  v.data.resize(v.shape.voxels());
  in.read(reinterpret_cast<char*>(v.data.data()),
          static_cast<std::streamsize>(v.data.size() * sizeof(float)));
  if (!in) throw IoError("truncated volume file " + path.string());
  return v;
}

void write_parcellation(const fs::path& path, const ParcellationMap& p) {
  write_array_file(path, p.shape, "int32", p.labels.data(),
                   p.labels.size() * sizeof(std::int32_t));
}

ParcellationMap read_parcellation(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  ParcellationMap p;
  p.shape = read_array_header(in, path, "int32");
  p.labels.resize(p.shape.voxels());
  in.read(reinterpret_cast<char*>(p.labels.data()),
          static_cast<std::streamsize>(p.labels.size() * sizeof(std::int32_t)));
  if (!in) throw IoError("truncated parcellation file " + path.string());
  return p;
}

void write_atlas(const fs::path& path, const AtlasConfig& atlas) {
  json regions = json::array();
  for (const auto& r : atlas.regions)
    regions.push_back({{"code", r.code}, {"name", r.name}, {"direction", to_string(r.direction)}});
  json doc = {{"K", atlas.k}, {"regions", regions}};
  write_text_file(path, doc.dump(2) + "\n");
}

AtlasConfig read_atlas(const fs::path& path) {
  json doc = json::parse(read_text_file(path));
  AtlasConfig atlas;
  atlas.k = doc.at("K").get<int>();
  for (const auto& r : doc.at("regions")) {
    atlas.regions.push_back({r.at("code").get<int>(), r.at("name").get<std::string>(),
                             direction_from_string(r.at("direction").get<std::string>())});
  }
  atlas.validate();
  return atlas;
}

void write_dataset(const fs::path& dir, const std::vector<Case>& cases,
                   const AtlasConfig& atlas) {
  fs::create_directories(dir / "arrays");
  write_atlas(dir / "atlas.json", atlas);
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::binary);
  if (!manifest) throw IoError("cannot write manifest in " + dir.string());
  for (const auto& c : cases) {
    std::string vol_rel = "arrays/" + c.id + "_vol.bin";
    std::string parc_rel = "arrays/" + c.id + "_parc.bin";
    write_volume(dir / vol_rel, c.volume);
    write_parcellation(dir / parc_rel, c.parcellation);
    json measures = json::object();
    for (const auto& [code, mm3] : c.measures.volume_mm3)
      measures[std::to_string(code)] = mm3;
    json record = {{"id", c.id},
                   {"diagnosis", to_string(c.diagnosis)},
                   {"age", c.clinical.age},
                   {"sex", to_string(c.clinical.sex)},
                   {"volume_path", vol_rel},
                   {"parcellation_path", parc_rel},
                   {"measures", measures}};
    manifest << record.dump() << '\n';
  }
  if (!manifest) throw IoError("manifest write failed in " + dir.string());
}

AtlasConfig read_dataset_atlas(const fs::path& dir) {
  return read_atlas(dir / "atlas.json");
}

std::vector<Case> read_dataset(const fs::path& dir) {
  std::ifstream manifest(dir / "manifest.jsonl", std::ios::binary);
  if (!manifest) throw IoError("cannot open manifest in " + dir.string());
  std::vector<Case> cases;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    json record = json::parse(line);
    Case c;
    c.id = record.at("id").get<std::string>();
    c.diagnosis = diagnosis_from_string(record.at("diagnosis").get<std::string>());
    c.clinical.age = record.at("age").get<double>();
    c.clinical.sex = sex_from_string(record.at("sex").get<std::string>());
    c.volume = read_volume(dir / record.at("volume_path").get<std::string>());
    c.parcellation = read_parcellation(dir / record.at("parcellation_path").get<std::string>());
    for (const auto& [key, value] : record.at("measures").items())
      c.measures.volume_mm3[std::stoi(key)] = value.get<double>();
    if (c.volume.shape != c.parcellation.shape)
      throw ShapeError("case " + c.id + ": volume and parcellation shapes differ");
    cases.push_back(std::move(c));
  }
  return cases;
}

void write_labels(const fs::path& path, const LabelMap& labels) {
  json doc = json::object();
  for (const auto& [id, set] : labels) {
    json per_region = json::object();
    for (const auto& [code, sev] : set.labels)
      per_region[std::to_string(code)] = to_string(sev);
    doc[id] = per_region;
  }
  write_text_file(path, doc.dump(2) + "\n");
}

LabelMap read_labels(const fs::path& path) {
  json doc = json::parse(read_text_file(path));
  LabelMap labels;
  for (const auto& [id, per_region] : doc.items()) {
    MCLabelSet set;
    for (const auto& [code, sev] : per_region.items())
      set.labels[std::stoi(code)] = severity_from_string(sev.get<std::string>());
    labels[id] = set;
  }
  return labels;
}

}  // namespace evidx::io
