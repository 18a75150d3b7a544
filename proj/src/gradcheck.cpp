#include "stochlat/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace stochlat {

GradCheckReport check_gradient(const ObjectiveBuilder& build, std::span<const double> params,
                               double step, double tolerance) {
  Graph g;
  std::vector<NodeId> leaves;
  leaves.reserve(params.size());
  for (double p : params) leaves.push_back(g.leaf(p));
  NodeId root = build(g, leaves);
  GradientVector analytic = g.gradient(root, leaves);

  GradCheckReport report;
  report.rows.resize(params.size());
  double scale = 1e-12;
  for (size_t i = 0; i < params.size(); ++i) {
    g.set_leaf(leaves[i], params[i] + step);
    g.refresh();
    double hi = g.value(root);
    g.set_leaf(leaves[i], params[i] - step);
    g.refresh();
    double lo = g.value(root);
    g.set_leaf(leaves[i], params[i]);

    double numeric = (hi - lo) / (2.0 * step);
    report.rows[i].analytic = analytic[i];
    report.rows[i].numeric = numeric;
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric)});
  }
  g.refresh();

  for (auto& row : report.rows) {
    row.rel = std::abs(row.analytic - row.numeric) / scale;
    report.max_rel = std::max(report.max_rel, row.rel);
  }
  report.pass = report.max_rel < tolerance;
  return report;
}

}  // namespace stochlat
