#include "stochlat/sensors.hpp"

#include <stdexcept>
#include <string>

namespace stochlat {

namespace {

void check_list(const std::vector<double>& xs, const char* name, bool boundary_only) {
  for (size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < -1.0 || xs[i] > 1.0)
      throw std::runtime_error(std::string(name) + " coordinate outside [-1, 1]");
    if (i > 0 && xs[i - 1] > xs[i])
      throw std::runtime_error(std::string(name) + " coordinates not sorted ascending");
    if (boundary_only && xs[i] != -1.0 && xs[i] != 1.0)
      throw std::runtime_error(std::string(name) + " coordinate not on the boundary");
  }
}

}  // namespace

void SensorLayout::validate() const {
  check_list(coords_k, "k-sensor", false);
  check_list(coords_u, "u-sensor", false);
  check_list(coords_f, "f-sensor", false);
  check_list(coords_b, "boundary-sensor", true);
}

std::vector<double> uniform_sensors(int n) {
  if (n <= 0) return {};
  if (n == 1) return {0.0};
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = -1.0 + 2.0 * i / (n - 1);
  xs.front() = -1.0;
  xs.back() = 1.0;
  return xs;
}

}  // namespace stochlat
