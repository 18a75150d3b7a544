#pragma once

#include <span>
#include <vector>

namespace stochlat {

// Uniform grid on [-1, 1] used for path simulation and the reference solve.
struct FineGrid {
  int nodes = 1001;
  double spacing = 0.0;
  std::vector<double> coords;

  static FineGrid uniform(int node_count = 1001);
};

// Solves -(1/10) d/dx[k du/dx] = f on [-1, 1], u(-1) = u(1) = 0, with the
// conservative second-order scheme
//   -(1/10) [k_{i+1/2}(u_{i+1}-u_i) - k_{i-1/2}(u_i-u_{i-1})] / h^2 = f_i,
// k at half-nodes taken as the arithmetic average, via tridiagonal
// elimination. k must be positive everywhere.
std::vector<double> solve_elliptic(std::span<const double> k_nodes,
                                   std::span<const double> f_nodes, const FineGrid& grid);

// Piecewise-linear read of grid values at an arbitrary coordinate in [-1, 1].
double interpolate_on_grid(std::span<const double> values, const FineGrid& grid, double x);

}  // namespace stochlat
