#include "evidx/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "evidx/io.hpp"

namespace evidx {

GroupKey group_key(const ClinicalInfo& clinical, double bin_years) {
  clinical.validate();
  return GroupKey{int(std::floor(clinical.age / bin_years)), clinical.sex};
}

std::map<GroupKey, std::vector<std::string>> group_cases(
    const std::vector<Case>& cases, double bin_years) {
  std::map<GroupKey, std::vector<std::string>> groups;
  for (const auto& c : cases) groups[group_key(c.clinical, bin_years)].push_back(c.id);
  return groups;
}

namespace {

double region_volume(const Case& c, int code) {
  auto it = c.measures.volume_mm3.find(code);
  if (it == c.measures.volume_mm3.end()) throw MissingRegionError(code);
  return it->second;
}

ClassAggregate& slot(CellStats& cell, Diagnosis d) {
  switch (d) {
    case Diagnosis::NC: return cell.nc;
    case Diagnosis::MCI: return cell.mci;
    default: return cell.ad;
  }
}

// Thresholds are midpoints of class averages; validity additionally requires
// the ordering implied by the region's direction.
std::optional<ThresholdPair> make_pair_if_ordered(const CellStats& cell,
                                                  Direction dir,
                                                  ThresholdSource source) {
  if (!cell.nc.defined() || !cell.mci.defined() || !cell.ad.defined()) return std::nullopt;
  ThresholdPair p;
  p.direction = dir;
  p.source = source;
  p.t_no = (cell.nc.mean() + cell.mci.mean()) / 2.0;
  p.t_sev = (cell.ad.mean() + cell.mci.mean()) / 2.0;
  const bool ordered = dir == Direction::Atrophy ? p.t_sev < p.t_no : p.t_no < p.t_sev;
  if (!ordered) return std::nullopt;
  return p;
}

}  // namespace

GroupStats compute_group_statistics(
    const std::vector<Case>& cases,
    const std::map<GroupKey, std::vector<std::string>>& groups,
    const AtlasConfig& atlas) {
  std::map<std::string, const Case*> by_id;
  for (const auto& c : cases) by_id[c.id] = &c;

  GroupStats stats;
  const std::vector<int> codes = atlas.k_codes();
  for (const auto& [key, ids] : groups) {
    for (int code : codes) {
      CellStats cell;
      for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw Error("group member '" + id + "' not among cases");
        const Case& c = *it->second;
        ClassAggregate& agg = slot(cell, c.diagnosis);
        agg.sum += region_volume(c, code);
        agg.count += 1;
      }
      stats.cells[{key, code}] = cell;
    }
  }
  // Pooled statistics accumulate over cases in input order, the same order a
  // plain single-loop recomputation would use.
  std::set<std::string> members;
  for (const auto& [key, ids] : groups) members.insert(ids.begin(), ids.end());
  for (int code : codes) {
    CellStats cell;
    for (const auto& c : cases) {
      if (!members.count(c.id)) continue;
      ClassAggregate& agg = slot(cell, c.diagnosis);
      agg.sum += region_volume(c, code);
      agg.count += 1;
    }
    stats.global[code] = cell;
  }
  return stats;
}

ThresholdTable derive_thresholds(const GroupStats& stats, const AtlasConfig& atlas,
                                 int min_group_size) {
  if (min_group_size < 1) throw ConfigError("min_group_size must be >= 1");
  ThresholdTable table;
  for (int code : atlas.k_codes()) {
    const Direction dir = atlas.region(code).direction;
    auto git = stats.global.find(code);
    if (git == stats.global.end())
      throw DegenerateStatisticsError("no pooled statistics for region " + std::to_string(code));
    const CellStats& g = git->second;
    for (Diagnosis d : {Diagnosis::NC, Diagnosis::MCI, Diagnosis::AD}) {
      if (!g.of(d).defined())
        throw DegenerateStatisticsError("no " + to_string(d) + " cases in threshold pool");
    }
    auto global_pair = make_pair_if_ordered(g, dir, ThresholdSource::GlobalFallback);
    if (!global_pair)
      throw DegenerateStatisticsError("pooled thresholds inverted for region " +
                                      std::to_string(code));
    table.global[code] = *global_pair;
  }
  for (const auto& [cell_key, cell] : stats.cells) {
    const auto& [group, code] = cell_key;
    const Direction dir = atlas.region(code).direction;
    const bool populated = cell.nc.count >= min_group_size &&
                           cell.mci.count >= min_group_size &&
                           cell.ad.count >= min_group_size;
    std::optional<ThresholdPair> pair;
    if (populated) pair = make_pair_if_ordered(cell, dir, ThresholdSource::Group);
    table.per_group[cell_key] = pair ? *pair : table.global.at(code);
  }
  return table;
}

const ThresholdPair& ThresholdTable::lookup(const GroupKey& g, int region) const {
  auto it = per_group.find({g, region});
  if (it != per_group.end()) return it->second;
  auto git = global.find(region);
  if (git == global.end()) throw MissingRegionError(region);
  return git->second;
}

Severity assign_label(double volume_mm3, const ThresholdPair& t) {
  if (t.direction == Direction::Atrophy) {
    if (volume_mm3 > t.t_no) return Severity::No;
    if (volume_mm3 < t.t_sev) return Severity::Severe;
    return Severity::Mild;
  }
  if (volume_mm3 < t.t_no) return Severity::No;
  if (volume_mm3 > t.t_sev) return Severity::Severe;
  return Severity::Mild;
}

LabelMap label_dataset(const std::vector<Case>& cases, const AtlasConfig& atlas,
                       int min_group_size,
                       const std::vector<std::string>& threshold_pool,
                       double bin_years) {
  std::vector<Case> pool;
  if (threshold_pool.empty()) {
    pool = cases;
  } else {
    std::set<std::string> wanted(threshold_pool.begin(), threshold_pool.end());
    for (const auto& c : cases)
      if (wanted.count(c.id)) pool.push_back(c);
  }
  auto groups = group_cases(pool, bin_years);
  auto stats = compute_group_statistics(pool, groups, atlas);
  auto thresholds = derive_thresholds(stats, atlas, min_group_size);

  LabelMap labels;
  const std::vector<int> codes = atlas.k_codes();
  for (const auto& c : cases) {
    const GroupKey key = group_key(c.clinical, bin_years);
    MCLabelSet set;
    for (int code : codes)
      set.labels[code] = assign_label(region_volume(c, code), thresholds.lookup(key, code));
    labels[c.id] = set;
  }
  return labels;
}

void write_threshold_report(const std::filesystem::path& path, const ThresholdTable& table) {
  std::ostringstream out;
  out << "group,region,direction,t_no,t_sev,source\n";
  out.precision(17);
  for (const auto& [cell_key, p] : table.per_group) {
    out << cell_key.first.str() << ',' << cell_key.second << ',' << to_string(p.direction)
        << ',' << p.t_no << ',' << p.t_sev << ','
        << (p.source == ThresholdSource::Group ? "Group" : "GlobalFallback") << '\n';
  }
  for (const auto& [code, p] : table.global) {
    out << "global," << code << ',' << to_string(p.direction) << ',' << p.t_no << ','
        << p.t_sev << ",GlobalFallback\n";
  }
  io::write_text_file(path, out.str());
}

}  // namespace evidx
