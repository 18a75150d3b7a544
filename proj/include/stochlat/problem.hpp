#pragma once

#include <string>

#include "stochlat/sensors.hpp"

namespace stochlat {

// What is measured and what is sought. Process mode approximates a single
// stochastic process from F readings alone (no equation); the other modes
// couple the measured blocks through the elliptic operator. HighDim is a
// forward problem at short correlation length; it only differs in preset
// parameters, not mechanics.
enum class ProblemMode { Process, Forward, Inverse, Mixed, HighDim };

const char* problem_mode_name(ProblemMode m);
ProblemMode parse_problem_mode(const std::string& name);

struct ProblemSpec {
  ProblemMode mode = ProblemMode::Forward;
  SensorLayout layout;
  int noise_dim = 4;

  // Fixed physics: -(1/10) d/dx[k du/dx] = f on [-1, 1], u(+-1) = 0.
  static constexpr double kDiffusionScale = 0.1;

  // Full concatenated snapshot length as seen by the encoder.
  size_t snapshot_length() const {
    return mode == ProblemMode::Process ? layout.n_f() : layout.total();
  }

  void validate() const;
};

}  // namespace stochlat
