#include "stochlat/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stochlat {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate))
    throw std::runtime_error("optimizer: learning rate must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw std::runtime_error("optimizer: betas must lie in [0, 1)");
  if (!(epsilon > 0)) throw std::runtime_error("optimizer: epsilon must be positive");
}

Optimizer::Optimizer(OptimizerConfig config, size_t size) : config_(config) {
  config_.validate();
  if (config_.kind == OptimizerConfig::Kind::Adam) {
    m_.assign(size, 0.0);
    v_.assign(size, 0.0);
  } else {
    m_.resize(size);  // size bookkeeping only
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::runtime_error("optimizer: parameter/gradient size mismatch");
  for (size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i]))
      throw std::runtime_error("optimizer: non-finite gradient at parameter " +
                               std::to_string(i));
  ++t_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerConfig::Kind::Sgd) {
    for (size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
    return;
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, double(t_));
  const double c2 = 1.0 - std::pow(b2, double(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
  }
}

}  // namespace stochlat
