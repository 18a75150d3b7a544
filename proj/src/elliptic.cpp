#include "stochlat/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stochlat {

FineGrid FineGrid::uniform(int node_count) {
  if (node_count < 3) throw std::runtime_error("FineGrid needs at least 3 nodes");
  FineGrid g;
  g.nodes = node_count;
  g.spacing = 2.0 / (node_count - 1);
  g.coords.resize(node_count);
  for (int i = 0; i < node_count; ++i) g.coords[i] = -1.0 + g.spacing * i;
  g.coords.front() = -1.0;
  g.coords.back() = 1.0;
  return g;
}

std::vector<double> solve_elliptic(std::span<const double> k_nodes,
                                   std::span<const double> f_nodes, const FineGrid& grid) {
  const int G = grid.nodes;
  if (static_cast<int>(k_nodes.size()) != G || static_cast<int>(f_nodes.size()) != G)
    throw std::runtime_error("solve_elliptic: field length does not match grid");
  for (int i = 0; i < G; ++i)
    if (!(k_nodes[i] > 0.0))
      throw std::runtime_error("solve_elliptic: nonpositive k at node " + std::to_string(i));

  // Interior unknowns u_1..u_{G-2}; u_0 = u_{G-1} = 0.
  const int n = G - 2;
  const double s = 0.1 / (grid.spacing * grid.spacing);
  std::vector<double> sub(n), diag(n), sup(n), rhs(n);
  for (int i = 0; i < n; ++i) {
    double k_lo = 0.5 * (k_nodes[i] + k_nodes[i + 1]);      // k_{i+1/2} about node i+1
    double k_hi = 0.5 * (k_nodes[i + 1] + k_nodes[i + 2]);
    sub[i] = -s * k_lo;
    diag[i] = s * (k_lo + k_hi);
    sup[i] = -s * k_hi;
    rhs[i] = f_nodes[i + 1];
  }

  // Thomas elimination; the system is strictly diagonally dominant-ish for
  // positive k, but guard the pivots anyway.
  for (int i = 1; i < n; ++i) {
    if (std::abs(diag[i - 1]) < 1e-300)
      throw std::runtime_error("solve_elliptic: singular tridiagonal system");
    double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (std::abs(diag[n - 1]) < 1e-300)
    throw std::runtime_error("solve_elliptic: singular tridiagonal system");

  std::vector<double> u(G, 0.0);
  u[n] = rhs[n - 1] / diag[n - 1];
  for (int i = n - 2; i >= 0; --i) u[i + 1] = (rhs[i] - sup[i] * u[i + 2]) / diag[i];
  return u;
}

double interpolate_on_grid(std::span<const double> values, const FineGrid& grid, double x) {
  if (static_cast<int>(values.size()) != grid.nodes)
    throw std::runtime_error("interpolate_on_grid: length mismatch");
  if (x < -1.0 || x > 1.0) throw std::runtime_error("interpolate_on_grid: x outside [-1, 1]");
  double t = (x + 1.0) / grid.spacing;
  int i = std::min(static_cast<int>(t), grid.nodes - 2);
  double frac = t - i;
  return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

}  // namespace stochlat
