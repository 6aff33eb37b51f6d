#pragma once

#include <filesystem>

namespace evidx {

// Line chart of mean accuracy vs training fraction per strategy, with a
// dashed reference line at the best baseline's full-data accuracy.
void render_sweep_svg(const std::filesystem::path& sweep_csv,
                      const std::filesystem::path& out_svg);

// Bar chart of the counterfactual difference histogram.
void render_histogram_svg(const std::filesystem::path& histogram_csv,
                          const std::filesystem::path& out_svg);

}  // namespace evidx
