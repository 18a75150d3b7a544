#pragma once

#include <vector>

namespace stochlat {

// Fixed measurement coordinates on [-1, 1] for the four snapshot blocks:
// coefficient field k, solution u, forcing f, boundary trace b.
struct SensorLayout {
  std::vector<double> coords_k;
  std::vector<double> coords_u;
  std::vector<double> coords_f;
  std::vector<double> coords_b;

  size_t n_k() const { return coords_k.size(); }
  size_t n_u() const { return coords_u.size(); }
  size_t n_f() const { return coords_f.size(); }
  size_t n_b() const { return coords_b.size(); }
  size_t total() const { return n_k() + n_u() + n_f() + n_b(); }

  // Sorted-ascending lists inside [-1, 1]; boundary coords only at +-1.
  void validate() const;

  friend bool operator==(const SensorLayout&, const SensorLayout&) = default;
};

// n equally spaced coordinates including both endpoints (n >= 2); n = 1
// gives the domain midpoint, n = 0 an empty list.
std::vector<double> uniform_sensors(int n);

}  // namespace stochlat
