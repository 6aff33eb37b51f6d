#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace evidx {

// One (method, encoder variant) result row, accuracy in percent.
struct BackboneReport {
  std::string method;
  std::string variant;
  double accuracy_pct = 0.0;
  double auroc = 0.0;
  bool is_baseline = false;
};

struct MethodAverage {
  std::string method;
  double accuracy_pct = 0.0;  // rounded to one decimal
  double auroc = 0.0;         // rounded to three decimals
  bool is_baseline = false;
  bool best_baseline_accuracy = false;
  bool best_baseline_auroc = false;
  bool best_accuracy = false;
  bool best_auroc = false;
};

// Arithmetic mean across encoder variants per method, half-up rounding at
// the reported precision; flags the best baseline and the best method per
// column. Row order follows first appearance in the input.
std::vector<MethodAverage> summarize_results(const std::vector<BackboneReport>& rows);

double round_to(double value, int decimals);

std::vector<BackboneReport> read_backbone_reports_csv(const std::filesystem::path& path);
void write_method_averages_csv(const std::filesystem::path& path,
                               const std::vector<MethodAverage>& rows);

}  // namespace evidx
