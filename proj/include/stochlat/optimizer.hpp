#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace stochlat {

struct OptimizerConfig {
  enum class Kind { Adam, Sgd };

  Kind kind = Kind::Adam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// First-order updater over one flat parameter vector. Adam keeps the usual
// two moment vectors with bias correction; Sgd is the plain rule. Steps are
// counted from 1 so the first bias correction divides by (1 - beta^1).
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, size_t size);

  // In-place update. Sizes must match the size given at construction;
  // non-finite gradient entries are reported with their index.
  void step(std::span<double> params, std::span<const double> grad);

  int64_t steps_taken() const { return t_; }

 private:
  OptimizerConfig config_;
  int64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace stochlat
