#include "evidx/summarize.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "evidx/errors.hpp"
#include "evidx/io.hpp"

namespace evidx {

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 0.5) / scale;
}

std::vector<MethodAverage> summarize_results(const std::vector<BackboneReport>& rows) {
  if (rows.empty()) throw EmptyEvalError("no reports to summarize");
  std::vector<std::string> order;
  std::map<std::string, std::vector<const BackboneReport*>> by_method;
  for (const auto& r : rows) {
    if (!by_method.count(r.method)) order.push_back(r.method);
    by_method[r.method].push_back(&r);
  }

  std::vector<MethodAverage> out;
  for (const auto& method : order) {
    const auto& group = by_method[method];
    double acc = 0.0, roc = 0.0;
    for (const auto* r : group) {
      acc += r->accuracy_pct;
      roc += r->auroc;
    }
    MethodAverage avg;
    avg.method = method;
    avg.accuracy_pct = round_to(acc / double(group.size()), 1);
    avg.auroc = round_to(roc / double(group.size()), 3);
    avg.is_baseline = group.front()->is_baseline;
    out.push_back(avg);
  }

  auto flag_best = [&](auto value_of, auto flag_of, bool baselines_only) {
    double best = -1.0;
    for (const auto& m : out)
      if (!baselines_only || m.is_baseline) best = std::max(best, value_of(m));
    for (auto& m : out)
      if ((!baselines_only || m.is_baseline) && value_of(m) == best) flag_of(m) = true;
  };
  flag_best([](const MethodAverage& m) { return m.accuracy_pct; },
            [](MethodAverage& m) -> bool& { return m.best_accuracy; }, false);
  flag_best([](const MethodAverage& m) { return m.auroc; },
            [](MethodAverage& m) -> bool& { return m.best_auroc; }, false);
  flag_best([](const MethodAverage& m) { return m.accuracy_pct; },
            [](MethodAverage& m) -> bool& { return m.best_baseline_accuracy; }, true);
  flag_best([](const MethodAverage& m) { return m.auroc; },
            [](MethodAverage& m) -> bool& { return m.best_baseline_auroc; }, true);
  return out;
}

std::vector<BackboneReport> read_backbone_reports_csv(const std::filesystem::path& path) {
  std::istringstream in(io::read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty report csv " + path.string());
  std::vector<BackboneReport> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string method, variant, acc, roc, baseline;
    std::getline(row, method, ',');
    std::getline(row, variant, ',');
    std::getline(row, acc, ',');
    std::getline(row, roc, ',');
    std::getline(row, baseline, ',');
    rows.push_back({method, variant, std::stod(acc), std::stod(roc), baseline == "1"});
  }
  return rows;
}

void write_method_averages_csv(const std::filesystem::path& path,
                               const std::vector<MethodAverage>& rows) {
  std::ostringstream out;
  out << "method,accuracy_pct,auroc,is_baseline,best_baseline_accuracy,"
         "best_baseline_auroc,best_accuracy,best_auroc\n";
  char buf[64];
  for (const auto& m : rows) {
    std::snprintf(buf, sizeof(buf), "%.1f", m.accuracy_pct);
    out << m.method << ',' << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.3f", m.auroc);
    out << buf << ',' << (m.is_baseline ? 1 : 0) << ',' << (m.best_baseline_accuracy ? 1 : 0)
        << ',' << (m.best_baseline_auroc ? 1 : 0) << ',' << (m.best_accuracy ? 1 : 0) << ','
        << (m.best_auroc ? 1 : 0) << '\n';
  }
  io::write_text_file(path, out.str());
}

}  // namespace evidx
