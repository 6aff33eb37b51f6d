// Independent reference implementations used only by tests. These are kept
// deliberately naive (flat loops, std::map everywhere) so they share no code
// or structure with the library paths they check.
#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "evidx/types.hpp"

namespace oracles {

using namespace evidx;

// ---- brute-force severity labeling -------------------------------------

struct NaiveKey {
  int age_bin;
  char sex;
  int region;
  bool operator<(const NaiveKey& o) const {
    if (age_bin != o.age_bin) return age_bin < o.age_bin;
    if (sex != o.sex) return sex < o.sex;
    return region < o.region;
  }
};

struct NaiveAvg {
  double sum = 0.0;
  long n = 0;
};

inline std::map<std::string, std::map<int, std::string>> naive_label_dataset(
    const std::vector<Case>& cases, const AtlasConfig& atlas, int min_group_size,
    const std::vector<std::string>& pool_ids = {}, double bin_years = 10.0) {
  std::set<std::string> pool(pool_ids.begin(), pool_ids.end());
  const bool use_all = pool.empty();

  std::vector<int> codes;
  for (int i = 0; i < atlas.k; ++i) codes.push_back(atlas.regions[std::size_t(i)].code);

  // class-conditional sums per (group, region) and per region globally
  std::map<NaiveKey, NaiveAvg> per_group[3];
  std::map<int, NaiveAvg> global[3];
  for (const auto& c : cases) {
    if (!use_all && !pool.count(c.id)) continue;
    const int cls = c.diagnosis == Diagnosis::NC ? 0 : c.diagnosis == Diagnosis::MCI ? 1 : 2;
    const int bin = int(std::floor(c.clinical.age / bin_years));
    const char sex = c.clinical.sex == Sex::F ? 'F' : 'M';
    for (int code : codes) {
      const double v = c.measures.volume_mm3.at(code);
      auto& g = per_group[cls][NaiveKey{bin, sex, code}];
      g.sum += v;
      g.n += 1;
      auto& gl = global[cls][code];
      gl.sum += v;
      gl.n += 1;
    }
  }

  struct Pair {
    double t_no, t_sev;
    bool ok;
  };
  auto midpoints = [&](double nc, double mci, double ad, bool atrophy) {
    Pair p{(nc + mci) / 2.0, (ad + mci) / 2.0, false};
    p.ok = atrophy ? p.t_sev < p.t_no : p.t_no < p.t_sev;
    return p;
  };

  std::map<int, Pair> global_pair;
  for (int code : codes) {
    const bool atrophy = atlas.region(code).direction == Direction::Atrophy;
    for (int cls = 0; cls < 3; ++cls)
      if (global[cls][code].n == 0) throw DegenerateStatisticsError("oracle: empty class");
    Pair p = midpoints(global[0][code].sum / double(global[0][code].n),
                       global[1][code].sum / double(global[1][code].n),
                       global[2][code].sum / double(global[2][code].n), atrophy);
    if (!p.ok) throw DegenerateStatisticsError("oracle: inverted global thresholds");
    global_pair[code] = p;
  }

  std::map<std::string, std::map<int, std::string>> labels;
  for (const auto& c : cases) {
    const int bin = int(std::floor(c.clinical.age / bin_years));
    const char sex = c.clinical.sex == Sex::F ? 'F' : 'M';
    for (int code : codes) {
      const bool atrophy = atlas.region(code).direction == Direction::Atrophy;
      const NaiveKey key{bin, sex, code};
      Pair p = global_pair[code];
      bool group_ok = true;
      for (int cls = 0; cls < 3; ++cls) {
        auto it = per_group[cls].find(key);
        if (it == per_group[cls].end() || it->second.n < min_group_size) group_ok = false;
      }
      if (group_ok) {
        Pair candidate = midpoints(
            per_group[0][key].sum / double(per_group[0][key].n),
            per_group[1][key].sum / double(per_group[1][key].n),
            per_group[2][key].sum / double(per_group[2][key].n), atrophy);
        if (candidate.ok) p = candidate;
      }
      const double v = c.measures.volume_mm3.at(code);
      std::string label;
      if (atrophy)
        label = v > p.t_no ? "No" : v < p.t_sev ? "Severe" : "Mild";
      else
        label = v < p.t_no ? "No" : v > p.t_sev ? "Severe" : "Mild";
      labels[c.id][code] = label;
    }
  }
  return labels;
}

// ---- pairwise AUROC ------------------------------------------------------

inline double pairwise_auroc(const std::vector<double>& scores,
                             const std::vector<Diagnosis>& truths) {
  double concordant = 0.0;
  long n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (truths[i] != Diagnosis::AD) continue;
    ++n_pos;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (truths[j] == Diagnosis::AD) continue;
      if (scores[i] > scores[j]) concordant += 1.0;
      else if (scores[i] == scores[j]) concordant += 0.5;
    }
  }
  for (Diagnosis d : truths)
    if (d != Diagnosis::AD) ++n_neg;
  return concordant / (double(n_pos) * double(n_neg));
}

}  // namespace oracles
