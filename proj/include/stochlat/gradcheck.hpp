#pragma once

#include <functional>
#include <span>
#include <vector>

#include "stochlat/graph.hpp"

namespace stochlat {

// Builds a scalar objective over parameter leaves. Called once on a fresh
// graph; the leaves arrive pre-seeded with the requested parameter values.
using ObjectiveBuilder = std::function<NodeId(Graph&, std::span<const NodeId>)>;

struct GradCheckRow {
  double analytic = 0.0;
  double numeric = 0.0;
  double rel = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  double max_rel = 0.0;
  bool pass = false;
};

// Compares reverse-mode gradients against central differences of the same
// objective. Discrepancies are normalized by the largest gradient magnitude
// seen (floored at 1e-12), so a handful of near-zero entries cannot turn
// finite-difference noise into a spurious failure.
GradCheckReport check_gradient(const ObjectiveBuilder& build, std::span<const double> params,
                               double step, double tolerance);

}  // namespace stochlat
