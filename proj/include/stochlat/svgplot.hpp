#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace stochlat {

// Minimal standalone SVG charting: enough for loss curves, distance curves,
// per-checkpoint error bars, and eigenvalue scatters, with no renderer
// dependency. Output is a pure function of the spec.

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  std::vector<double> y_err;  // optional symmetric error bars, empty or |y|-sized
  std::string color;          // css color; empty picks from a fixed palette
  bool line = true;
  bool points = false;
};

struct PlotSpec {
  std::string title, x_label, y_label;
  std::vector<PlotSeries> series;
  bool log_y = false;  // decade-style axis; requires positive y values
  int width = 720;
  int height = 440;
};

std::string render_svg(const PlotSpec& spec);
void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec);

}  // namespace stochlat
