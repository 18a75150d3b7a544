#include "stochlat/gp.hpp"

#include <cmath>
#include <stdexcept>

namespace stochlat {

double GaussKernelSpec::covariance(double x, double y) const {
  double d = x - y;
  return variance * std::exp(-d * d / width);
}

void GaussKernelSpec::validate() const {
  if (variance < 0.0) throw std::runtime_error("kernel variance must be >= 0");
  if (width <= 0.0) throw std::runtime_error("kernel width must be > 0");
}

Eigen::MatrixXd gauss_kernel_matrix(const GaussKernelSpec& spec, std::span<const double> coords) {
  spec.validate();
  const int n = static_cast<int>(coords.size());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = spec.variance;
    for (int j = 0; j < i; ++j) {
      double c = spec.covariance(coords[i], coords[j]);
      K(i, j) = c;
      K(j, i) = c;
    }
  }
  return K;
}

GpSampler::GpSampler(const GaussKernelSpec& spec, std::span<const double> coords) : spec_(spec) {
  const int n = static_cast<int>(coords.size());
  if (n == 0) throw std::runtime_error("GpSampler: empty coordinate list");
  if (spec.variance == 0.0) {
    spec_.validate();
    factor_ = Eigen::MatrixXd::Zero(n, n);
    return;
  }
  Eigen::MatrixXd K = gauss_kernel_matrix(spec, coords);
  for (double jitter = 1e-10 * spec.variance; jitter <= 1e-6 * spec.variance * (1 + 1e-12);
       jitter *= 10.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(K + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      return;
    }
  }
  throw std::runtime_error("GpSampler: kernel matrix not positive definite after jitter");
}

Eigen::VectorXd GpSampler::draw(Rng& rng) const {
  const int n = dim();
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = rng.normal();
  if (spec_.variance == 0.0) return Eigen::VectorXd::Constant(n, spec_.mean);
  return (factor_ * g).array() + spec_.mean;
}

Eigen::MatrixXd sample_gp(const GaussKernelSpec& spec, std::span<const double> coords, int count,
                          uint64_t seed) {
  GpSampler sampler(spec, coords);
  Eigen::MatrixXd paths(count, sampler.dim());
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, static_cast<uint64_t>(i));
    paths.row(i) = sampler.draw(rng).transpose();
  }
  return paths;
}

}  // namespace stochlat
