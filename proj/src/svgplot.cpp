#include "stochlat/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace stochlat {

namespace {

std::runtime_error fail(const std::string& what) { return std::runtime_error("plot: " + what); }

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
  void pad() {
    if (lo == hi) {
      double d = lo == 0 ? 1.0 : 0.1 * std::abs(lo);
      lo -= d;
      hi += d;
    } else {
      double d = 0.05 * (hi - lo);
      lo -= d;
      hi += d;
    }
  }
};

// Ticks at a 1-2-5 step covering [lo, hi], about `target` of them.
std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  double raw = (hi - lo) / target;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10 * mag;
  for (double m : {1.0, 2.0, 5.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 1e-9 * step; t += step) ticks.push_back(t == 0 ? 0 : t);  // avoid -0
  return ticks;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  if (spec.series.empty()) throw fail("no series to draw");
  for (const PlotSeries& s : spec.series) {
    if (s.x.empty()) throw fail("series '" + s.label + "' is empty");
    if (s.x.size() != s.y.size()) throw fail("series '" + s.label + "' has mismatched x/y");
    if (!s.y_err.empty() && s.y_err.size() != s.y.size())
      throw fail("series '" + s.label + "' has mismatched error bars");
  }

  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };

  Range rx, ry;
  for (const PlotSeries& s : spec.series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      double y = s.y[i];
      double err = s.y_err.empty() ? 0 : s.y_err[i];
      if (spec.log_y && y <= 0) continue;
      rx.add(s.x[i]);
      ry.add(ty(y));
      if (err != 0) {
        if (!spec.log_y || y - err > 0) ry.add(ty(y - err));
        ry.add(ty(y + err));
      }
    }
  }
  if (!rx.valid() || !ry.valid())
    throw fail(spec.log_y ? "no positive values for a log axis" : "no finite values to draw");
  rx.pad();
  ry.pad();

  double left = 74, right = 18, top = 42, bottom = 54;
  double w = spec.width, h = spec.height;
  double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](double v) { return left + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double v) { return top + (ry.hi - ty(v)) / (ry.hi - ry.lo) * ph; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
  out << "<rect width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
      << "text-anchor=\"middle\">" << escape(spec.title) << "</text>\n";

  // grid and ticks
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double t : nice_ticks(rx.lo, rx.hi)) {
    double x = px(t);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(top + ph) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 16)
        << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  for (double t : nice_ticks(ry.lo, ry.hi)) {
    double y = top + (ry.hi - t) / (ry.hi - ry.lo) * ph;
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + pw)
        << "\" y2=\"" << num(y) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\">" << num(spec.log_y ? std::pow(10.0, t) : t) << "</text>\n";
  }
  out << "</g>\n";

  // frame
  out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // series
  size_t color_i = 0;
  for (const PlotSeries& s : spec.series) {
    std::string color = s.color.empty()
                            ? kPalette[color_i++ % (sizeof kPalette / sizeof *kPalette)]
                            : s.color;
    auto drawable = [&](size_t i) { return !spec.log_y || s.y[i] > 0; };
    if (!s.y_err.empty()) {
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (!drawable(i) || s.y_err[i] == 0) continue;
        double x = px(s.x[i]);
        double y_lo = s.y[i] - s.y_err[i], y_hi = s.y[i] + s.y_err[i];
        if (spec.log_y && y_lo <= 0) y_lo = std::pow(10.0, ry.lo);
        out << "<line x1=\"" << num(x) << "\" y1=\"" << num(py(y_lo)) << "\" x2=\"" << num(x)
            << "\" y2=\"" << num(py(y_hi)) << "\" stroke=\"" << color << "\"/>\n";
        for (double yv : {y_lo, y_hi})
          out << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(py(yv)) << "\" x2=\""
              << num(x + 4) << "\" y2=\"" << num(py(yv)) << "\" stroke=\"" << color << "\"/>\n";
      }
    }
    if (s.line) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
      bool first = true;
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (!drawable(i)) continue;
        out << (first ? "" : " ") << num(px(s.x[i])) << "," << num(py(s.y[i]));
        first = false;
      }
      out << "\"/>\n";
    }
    if (s.points) {
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (!drawable(i)) continue;
        out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
            << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
  }

  // legend
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  double ly = top + 14;
  color_i = 0;
  for (const PlotSeries& s : spec.series) {
    std::string color = s.color.empty()
                            ? kPalette[color_i++ % (sizeof kPalette / sizeof *kPalette)]
                            : s.color;
    if (!s.label.empty()) {
      out << "<line x1=\"" << num(left + pw - 150) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
          << num(left + pw - 128) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << num(left + pw - 122) << "\" y=\"" << num(ly) << "\">"
          << escape(s.label) << "</text>\n";
      ly += 16;
    }
  }
  out << "</g>\n";

  // axis labels
  out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(h - 12)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
      << escape(spec.x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << num(top + ph / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 18 " << num(top + ph / 2) << ")\">" << escape(spec.y_label)
      << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec) {
  std::string body = render_svg(spec);
  std::ofstream out(path);
  if (!out) throw fail("cannot write " + path.string());
  out << body;
  if (!out) throw fail("failed while writing " + path.string());
}

}  // namespace stochlat
