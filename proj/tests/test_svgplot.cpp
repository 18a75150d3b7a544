#include "stochlat/svgplot.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"

using namespace stochlat;

namespace {

size_t count_of(const std::string& hay, const std::string& needle) {
  size_t n = 0;
  for (size_t at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
  return n;
}

PlotSpec two_series() {
  PlotSpec spec;
  spec.title = "demo";
  spec.x_label = "epoch";
  spec.y_label = "value";
  spec.series.push_back({"first", {0, 1, 2, 3}, {1, 2, 1.5, 3}, {}, "", true, false});
  spec.series.push_back({"second", {0, 1, 2, 3}, {2, 1, 2.5, 2}, {}, "", false, true});
  return spec;
}

}  // namespace

TEST_CASE("render_svg emits a well-formed standalone document") {
  std::string svg = render_svg(two_series());
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
  CHECK(svg.find("</svg>") == svg.size() - 7);
  CHECK(count_of(svg, "<polyline") == 1);   // one line series
  CHECK(count_of(svg, "<circle") == 4);     // one marker per point
  CHECK(svg.find(">demo<") != std::string::npos);
  CHECK(svg.find(">epoch<") != std::string::npos);
  CHECK(svg.find(">first<") != std::string::npos);
  CHECK(svg.find(">second<") != std::string::npos);
}

TEST_CASE("render_svg is deterministic") {
  CHECK(render_svg(two_series()) == render_svg(two_series()));
}

TEST_CASE("labels are xml-escaped") {
  PlotSpec spec = two_series();
  spec.title = "a<b & c>d";
  std::string svg = render_svg(spec);
  CHECK(svg.find(">a&lt;b &amp; c&gt;d<") != std::string::npos);
  CHECK(svg.find("a<b") == std::string::npos);
}

TEST_CASE("error bars add bar segments") {
  PlotSpec spec;
  spec.series.push_back({"bars", {0, 1, 2}, {1, 2, 3}, {0.5, 0.25, 0.5}, "", false, true});
  std::string svg = render_svg(spec);
  // three bars, each a vertical line plus two caps, on top of the frame,
  // grid lines, and legend stroke
  CHECK(count_of(svg, "<line") >= 9);
  CHECK(count_of(svg, "<circle") == 3);
}

TEST_CASE("log axis skips nonpositive values and labels decades") {
  PlotSpec spec;
  spec.log_y = true;
  spec.series.push_back({"ev", {1, 2, 3, 4}, {10, 1, 0.1, 0}, {}, "", true, true});
  std::string svg = render_svg(spec);
  CHECK(count_of(svg, "<circle") == 3);  // the zero is undrawable
  CHECK(svg.find(">10<") != std::string::npos);
  CHECK(svg.find(">0.1<") != std::string::npos);

  PlotSpec bad;
  bad.log_y = true;
  bad.series.push_back({"none", {0, 1}, {0, -1}, {}, "", true, false});
  CHECK_THROWS_WITH_AS(render_svg(bad), "plot: no positive values for a log axis",
                       std::runtime_error);
}

TEST_CASE("degenerate specs are rejected") {
  PlotSpec empty;
  CHECK_THROWS_AS(render_svg(empty), std::runtime_error);

  PlotSpec no_points;
  no_points.series.push_back({"s", {}, {}, {}, "", true, false});
  CHECK_THROWS_AS(render_svg(no_points), std::runtime_error);

  PlotSpec mismatched;
  mismatched.series.push_back({"s", {1, 2}, {1}, {}, "", true, false});
  CHECK_THROWS_AS(render_svg(mismatched), std::runtime_error);

  PlotSpec bad_err;
  bad_err.series.push_back({"s", {1, 2}, {1, 2}, {0.1}, "", true, false});
  CHECK_THROWS_AS(render_svg(bad_err), std::runtime_error);
}

TEST_CASE("constant series still draws with a padded range") {
  PlotSpec spec;
  spec.series.push_back({"flat", {0, 1}, {5, 5}, {}, "", true, false});
  std::string svg = render_svg(spec);
  CHECK(count_of(svg, "<polyline") == 1);
}

TEST_CASE("write_svg_plot writes the rendered bytes") {
  std::filesystem::path p =
      std::filesystem::temp_directory_path() / "stochlat-test-plot.svg";
  std::filesystem::remove(p);
  write_svg_plot(p, two_series());
  std::ifstream in(p);
  REQUIRE(in);
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(body == render_svg(two_series()));
  std::filesystem::remove(p);
}
