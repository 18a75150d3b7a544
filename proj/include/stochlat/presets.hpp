#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stochlat/gp.hpp"
#include "stochlat/problem.hpp"
#include "stochlat/trainer.hpp"

namespace stochlat {

// A fully specified experiment: what to measure, which random fields drive
// the data, and how to train on it.
struct ExperimentPreset {
  std::string name;
  std::string summary;
  ProblemSpec problem;
  GaussKernelSpec k_hat;  // latent field behind k; ignored in process mode
  GaussKernelSpec f;
  int train_count = 1000;  // N snapshots drawn per epoch
  TrainConfig config;

  void validate() const;  // also requires config.noise_dim == problem.noise_dim
};

// Built-in experiment settings. Names are stable CLI identifiers.
const std::vector<ExperimentPreset>& experiment_presets();
const ExperimentPreset* find_preset(const std::string& name);

// Applies one configuration override. Returns false for unknown keys.
// Accepted keys: mode, sensors_k/u/f/b (uniform counts), train_count,
// {k,f}_{mean,variance,width}, and every training key from
// apply_config_entry.
bool apply_preset_entry(ExperimentPreset& preset, const std::string& key,
                        const std::string& value);

// key: value (or key = value) lines with '#' comments. An optional leading
// `preset` line replaces the base wholesale; every later line overrides one
// field. The result is validated, so contradictory settings (say an inverse
// layout with several k sensors) are rejected here.
ExperimentPreset resolve_config(std::istream& in, const ExperimentPreset& base);
ExperimentPreset resolve_config_file(const std::filesystem::path& path,
                                     const ExperimentPreset& base);

}  // namespace stochlat
