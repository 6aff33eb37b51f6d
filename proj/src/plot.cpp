#include "evidx/plot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "evidx/errors.hpp"
#include "evidx/io.hpp"
#include "evidx/sweep.hpp"

namespace evidx {

namespace {

constexpr int kWidth = 640, kHeight = 420;
constexpr int kMarginLeft = 70, kMarginRight = 30, kMarginTop = 30, kMarginBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Canvas {
  std::ostringstream svg;

  Canvas() {
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='"
        << kHeight << "' viewBox='0 0 " << kWidth << ' ' << kHeight << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& color,
            double width = 1.0, bool dashed = false) {
    svg << "<line x1='" << fmt(x1) << "' y1='" << fmt(y1) << "' x2='" << fmt(x2) << "' y2='"
        << fmt(y2) << "' stroke='" << color << "' stroke-width='" << fmt(width) << '\'';
    if (dashed) svg << " stroke-dasharray='6,4'";
    svg << "/>\n";
  }
  void circle(double x, double y, const std::string& color) {
    svg << "<circle cx='" << fmt(x) << "' cy='" << fmt(y) << "' r='3.5' fill='" << color
        << "'/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& color) {
    svg << "<rect x='" << fmt(x) << "' y='" << fmt(y) << "' width='" << fmt(w)
        << "' height='" << fmt(h) << "' fill='" << color << "'/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "middle", const std::string& color = "#333") {
    svg << "<text x='" << fmt(x) << "' y='" << fmt(y) << "' font-size='" << size
        << "' font-family='sans-serif' text-anchor='" << anchor << "' fill='" << color
        << "'>" << s << "</text>\n";
  }
  std::string finish() {
    svg << "</svg>\n";
    return svg.str();
  }
};

double plot_x(double v, double lo, double hi) {
  return kMarginLeft + (v - lo) / (hi - lo) * (kWidth - kMarginLeft - kMarginRight);
}

double plot_y(double v, double lo, double hi) {
  return kHeight - kMarginBottom -
         (v - lo) / (hi - lo) * (kHeight - kMarginTop - kMarginBottom);
}

}  // namespace

void render_sweep_svg(const std::filesystem::path& sweep_csv,
                      const std::filesystem::path& out_svg) {
  SweepResult sweep = read_sweep_csv(sweep_csv);
  if (sweep.cells.empty()) throw EmptyEvalError("sweep csv holds no rows");

  std::map<std::string, std::map<double, std::pair<double, long>>> series;
  double best_baseline_full = -1.0;
  for (const auto& c : sweep.cells) {
    auto key = to_string(c.strategy);
    series[key][c.fraction].first += c.accuracy;
    series[key][c.fraction].second += 1;
  }
  for (const auto& [key, points] : series) {
    if (key != "random" && key != "pretrained") continue;
    auto it = points.find(1.0);
    if (it != points.end())
      best_baseline_full =
          std::max(best_baseline_full, it->second.first / double(it->second.second));
  }

  double y_lo = 1.0, y_hi = 0.0;
  for (const auto& [key, points] : series)
    for (const auto& [f, sc] : points) {
      const double v = sc.first / double(sc.second);
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  if (best_baseline_full >= 0.0) {
    y_lo = std::min(y_lo, best_baseline_full);
    y_hi = std::max(y_hi, best_baseline_full);
  }
  const double pad = std::max(0.02, (y_hi - y_lo) * 0.15);
  y_lo = std::max(0.0, y_lo - pad);
  y_hi = std::min(1.0, y_hi + pad);
  const double x_lo = sweep.fractions.front(), x_hi = sweep.fractions.back();

  Canvas c;
  c.line(kMarginLeft, kHeight - kMarginBottom, kWidth - kMarginRight,
         kHeight - kMarginBottom, "#333");
  c.line(kMarginLeft, kMarginTop, kMarginLeft, kHeight - kMarginBottom, "#333");
  for (double f : sweep.fractions) {
    const double x = plot_x(f, x_lo, x_hi);
    c.line(x, kHeight - kMarginBottom, x, kHeight - kMarginBottom + 5, "#333");
    c.text(x, kHeight - kMarginBottom + 20, fmt(f * 100.0) + "%");
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = y_lo + (y_hi - y_lo) * i / 4.0;
    const double y = plot_y(v, y_lo, y_hi);
    c.line(kMarginLeft - 5, y, kMarginLeft, y, "#333");
    c.text(kMarginLeft - 10, y + 4, fmt(v * 100.0), 11, "end");
  }
  c.text((kMarginLeft + kWidth - kMarginRight) / 2.0, kHeight - 15,
         "training data fraction");
  c.text(18, (kMarginTop + kHeight - kMarginBottom) / 2.0, "accuracy (%)", 12, "middle");

  if (best_baseline_full >= 0.0) {
    const double y = plot_y(best_baseline_full, y_lo, y_hi);
    c.line(kMarginLeft, y, kWidth - kMarginRight, y, "#555", 1.2, true);
    c.text(kWidth - kMarginRight - 4, y - 6, "best baseline @ 100%", 11, "end", "#555");
  }

  int color_idx = 0;
  double legend_y = kMarginTop + 6;
  for (const auto& [key, points] : series) {
    const std::string color = kPalette[color_idx % 6];
    double prev_x = 0.0, prev_y = 0.0;
    bool first = true;
    for (const auto& [f, sc] : points) {
      const double v = sc.first / double(sc.second);
      const double x = plot_x(f, x_lo, x_hi), y = plot_y(v, y_lo, y_hi);
      if (!first) c.line(prev_x, prev_y, x, y, color, 1.8);
      c.circle(x, y, color);
      prev_x = x;
      prev_y = y;
      first = false;
    }
    c.line(kMarginLeft + 10, legend_y, kMarginLeft + 34, legend_y, color, 2.0);
    c.text(kMarginLeft + 40, legend_y + 4, key, 12, "start");
    legend_y += 16;
    ++color_idx;
  }
  io::write_text_file(out_svg, c.finish());
}

void render_histogram_svg(const std::filesystem::path& histogram_csv,
                          const std::filesystem::path& out_svg) {
  std::istringstream in(io::read_text_file(histogram_csv));
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty histogram csv");
  std::vector<std::pair<double, long>> bins;  // (bin_low, count)
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string lo, hi, count;
    std::getline(row, lo, ',');
    std::getline(row, hi, ',');
    std::getline(row, count, ',');
    bins.push_back({std::stod(lo), std::stol(count)});
  }
  if (bins.empty()) throw EmptyEvalError("histogram csv holds no bins");

  long max_count = 1;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    max_count = std::max(max_count, bins[i].second);
    if (bins[i].second > 0) last_nonzero = i;
  }
  const std::size_t shown = std::min(bins.size(), last_nonzero + 2);

  Canvas c;
  c.line(kMarginLeft, kHeight - kMarginBottom, kWidth - kMarginRight,
         kHeight - kMarginBottom, "#333");
  c.line(kMarginLeft, kMarginTop, kMarginLeft, kHeight - kMarginBottom, "#333");
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double bar_w = plot_w / double(shown);
  for (std::size_t i = 0; i < shown; ++i) {
    const double h = double(bins[i].second) / double(max_count) *
                     (kHeight - kMarginTop - kMarginBottom);
    c.rect(kMarginLeft + double(i) * bar_w + 1, kHeight - kMarginBottom - h, bar_w - 2, h,
           "#1f77b4");
    if (i % 5 == 0)
      c.text(kMarginLeft + double(i) * bar_w, kHeight - kMarginBottom + 18,
             fmt(bins[i].first), 10, "start");
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = double(max_count) * i / 4.0;
    const double y = kHeight - kMarginBottom -
                     v / double(max_count) * (kHeight - kMarginTop - kMarginBottom);
    c.line(kMarginLeft - 5, y, kMarginLeft, y, "#333");
    c.text(kMarginLeft - 10, y + 4, fmt(v), 11, "end");
  }
  c.text((kMarginLeft + kWidth - kMarginRight) / 2.0, kHeight - 15,
         "prediction difference");
  c.text(18, (kMarginTop + kHeight - kMarginBottom) / 2.0, "pairs", 12, "middle");
  io::write_text_file(out_svg, c.finish());
}

}  // namespace evidx
