#include "stochlat/problem.hpp"

#include <stdexcept>

namespace stochlat {

const char* problem_mode_name(ProblemMode m) {
  switch (m) {
    case ProblemMode::Process: return "process";
    case ProblemMode::Forward: return "forward";
    case ProblemMode::Inverse: return "inverse";
    case ProblemMode::Mixed: return "mixed";
    case ProblemMode::HighDim: return "high-dim";
  }
  return "?";
}

ProblemMode parse_problem_mode(const std::string& name) {
  for (ProblemMode m : {ProblemMode::Process, ProblemMode::Forward, ProblemMode::Inverse,
                        ProblemMode::Mixed, ProblemMode::HighDim}) {
    if (name == problem_mode_name(m)) return m;
  }
  throw std::runtime_error("unknown problem mode '" + name + "'");
}

void ProblemSpec::validate() const {
  layout.validate();
  if (noise_dim < 1) throw std::runtime_error("noise dimension must be >= 1");
  switch (mode) {
    case ProblemMode::Process:
      if (layout.n_f() == 0 || layout.n_k() || layout.n_u() || layout.n_b())
        throw std::runtime_error("process mode measures the F block only");
      break;
    case ProblemMode::Forward:
    case ProblemMode::HighDim:
      // u is unknown away from the boundary: no interior u sensors.
      if (layout.n_u() != 0)
        throw std::runtime_error("forward mode must not carry interior u sensors");
      if (layout.n_k() == 0 || layout.n_f() == 0)
        throw std::runtime_error("forward mode needs k and f sensors");
      break;
    case ProblemMode::Inverse:
      if (layout.n_k() != 1)
        throw std::runtime_error("inverse mode carries exactly one k sensor");
      if (layout.n_u() == 0 || layout.n_f() == 0)
        throw std::runtime_error("inverse mode needs u and f sensors");
      break;
    case ProblemMode::Mixed:
      if (layout.n_k() == 0 || layout.n_u() == 0 || layout.n_f() == 0)
        throw std::runtime_error("mixed mode needs partial k, u and f sensors");
      break;
  }
}

}  // namespace stochlat
