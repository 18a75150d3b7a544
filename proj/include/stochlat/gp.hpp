#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "stochlat/rng.hpp"

namespace stochlat {

// Constant mean plus squared-exponential covariance
// c(x, x') = variance * exp(-(x - x')^2 / width).
// A correlation length l corresponds to width = 2 l^2.
struct GaussKernelSpec {
  double mean = 0.0;
  double variance = 1.0;
  double width = 1.0;

  double covariance(double x, double y) const;
  void validate() const;  // variance >= 0, width > 0
};

Eigen::MatrixXd gauss_kernel_matrix(const GaussKernelSpec& spec, std::span<const double> coords);

// Cached Cholesky-type factor for repeated draws at fixed coordinates.
// The kernel matrix gets diagonal jitter 1e-10 * variance, escalated by
// factors of 10 up to 1e-6 * variance before the factorization gives up.
class GpSampler {
 public:
  GpSampler(const GaussKernelSpec& spec, std::span<const double> coords);

  // mean + L * g with g standard normal from rng (coords-count draws).
  Eigen::VectorXd draw(Rng& rng) const;

  int dim() const { return static_cast<int>(factor_.rows()); }

 private:
  GaussKernelSpec spec_;
  Eigen::MatrixXd factor_;  // lower triangular; zero when variance == 0
};

// count paths, one per row; path i uses the (seed, i) substream, so any
// prefix of the set is independent of count.
Eigen::MatrixXd sample_gp(const GaussKernelSpec& spec, std::span<const double> coords, int count,
                          uint64_t seed);

}  // namespace stochlat
