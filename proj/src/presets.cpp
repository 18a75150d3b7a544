#include "stochlat/presets.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <stdexcept>

namespace stochlat {

namespace {

std::runtime_error fail(const std::string& what) { return std::runtime_error("config: " + what); }

int parse_count(const std::string& key, const std::string& value) {
  char* end = nullptr;
  long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') throw fail("bad integer for " + key + ": " + value);
  if (v < 0 || v > 1000000) throw fail("out-of-range value for " + key + ": " + value);
  return int(v);
}

double parse_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') throw fail("bad number for " + key + ": " + value);
  return v;
}

GaussKernelSpec sde_k_hat() { return {0.0, 4.0 / 25.0, 1.0}; }
GaussKernelSpec sde_f() { return {0.5, 9.0 / 400.0, 1.0 / 25.0}; }

ExperimentPreset process_preset(const std::string& name, double corr_length) {
  ExperimentPreset p;
  p.name = name;
  p.summary = "process approximation, 6 f sensors, correlation length " +
              std::to_string(corr_length).substr(0, 3);
  p.problem.mode = ProblemMode::Process;
  p.problem.layout = {{}, {}, uniform_sensors(6), {}};
  p.f = {0.0, 1.0, 2.0 * corr_length * corr_length};
  p.config.epochs = 5000;
  p.config.hidden_layers = 3;
  p.config.hidden_width = 64;
  p.problem.noise_dim = p.config.noise_dim;
  return p;
}

ExperimentPreset forward_preset(const std::string& name, int train_count, int batch,
                                int noise_dim) {
  ExperimentPreset p;
  p.name = name;
  p.summary = "forward problem, 13 k / 21 f / 2 boundary sensors, N=" +
              std::to_string(train_count) + ", batch " + std::to_string(batch) + ", noise dim " +
              std::to_string(noise_dim);
  p.problem.mode = ProblemMode::Forward;
  p.problem.layout = {uniform_sensors(13), {}, uniform_sensors(21), {-1.0, 1.0}};
  p.k_hat = sde_k_hat();
  p.f = sde_f();
  p.train_count = train_count;
  p.config.batch_size = batch;
  p.config.noise_dim = noise_dim;
  p.problem.noise_dim = noise_dim;
  return p;
}

ExperimentPreset mixed_preset(const std::string& name, int n_k, int n_u) {
  ExperimentPreset p;
  p.name = name;
  p.summary = "mixed problem, " + std::to_string(n_k) + " k / " + std::to_string(n_u) +
              " u (boundary included) / 21 f sensors";
  p.problem.mode = ProblemMode::Mixed;
  p.problem.layout = {uniform_sensors(n_k), uniform_sensors(n_u), uniform_sensors(21), {}};
  p.k_hat = sde_k_hat();
  p.f = sde_f();
  p.problem.noise_dim = p.config.noise_dim;
  return p;
}

ExperimentPreset highdim_preset(const std::string& name, int n_f, int noise_dim, double a) {
  ExperimentPreset p;
  p.name = name;
  p.summary = "short-correlation forcing (length scale " + std::to_string(a).substr(0, 4) +
              "), 13 k / " + std::to_string(n_f) + " f / 2 boundary sensors, noise dim " +
              std::to_string(noise_dim);
  p.problem.mode = ProblemMode::HighDim;
  p.problem.layout = {uniform_sensors(13), {}, uniform_sensors(n_f), {-1.0, 1.0}};
  p.k_hat = sde_k_hat();
  p.f = {0.5, 9.0 / 400.0, a * a};
  p.train_count = 5000;
  p.config.batch_size = 1000;
  p.config.noise_dim = noise_dim;
  p.problem.noise_dim = noise_dim;
  return p;
}

ExperimentPreset inverse_preset() {
  ExperimentPreset p;
  p.name = "inverse";
  p.summary = "inverse problem, 1 k / 13 u (boundary included) / 21 f sensors";
  p.problem.mode = ProblemMode::Inverse;
  p.problem.layout = {uniform_sensors(1), uniform_sensors(13), uniform_sensors(21), {}};
  p.k_hat = sde_k_hat();
  p.f = sde_f();
  p.problem.noise_dim = p.config.noise_dim;
  return p;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void ExperimentPreset::validate() const {
  if (name.empty()) throw fail("preset has no name");
  problem.validate();
  config.validate();
  f.validate();
  if (problem.mode != ProblemMode::Process) k_hat.validate();
  if (config.noise_dim != problem.noise_dim)
    throw fail("noise dimension disagrees between problem and training settings");
  if (train_count < config.batch_size)
    throw fail("train_count is smaller than the batch size");
}

const std::vector<ExperimentPreset>& experiment_presets() {
  static const std::vector<ExperimentPreset> presets = [] {
    std::vector<ExperimentPreset> out;
    out.push_back(process_preset("sp-l1", 1.0));
    out.push_back(process_preset("sp-l0.5", 0.5));
    out.push_back(process_preset("sp-l0.2", 0.2));
    out.push_back(forward_preset("forward", 1000, 500, 4));
    out.push_back(forward_preset("forward-m2", 1000, 500, 2));
    out.push_back(forward_preset("forward-m20", 1000, 500, 20));
    out.push_back(forward_preset("forward-n300", 300, 300, 4));
    out.push_back(forward_preset("forward-n2000", 2000, 1000, 4));
    out.push_back(forward_preset("forward-n5000", 5000, 1000, 4));
    out.push_back(inverse_preset());
    out.push_back(mixed_preset("mixed-a", 15, 9));
    out.push_back(mixed_preset("mixed-b", 9, 15));
    out.push_back(highdim_preset("highdim-a008", 21, 10, 0.08));
    out.push_back(highdim_preset("highdim-a002", 41, 20, 0.02));
    for (const ExperimentPreset& p : out) p.validate();
    return out;
  }();
  return presets;
}

const ExperimentPreset* find_preset(const std::string& name) {
  for (const ExperimentPreset& p : experiment_presets())
    if (p.name == name) return &p;
  return nullptr;
}

bool apply_preset_entry(ExperimentPreset& preset, const std::string& key,
                        const std::string& value) {
  if (key == "mode") {
    preset.problem.mode = parse_problem_mode(value);
  } else if (key == "sensors_k") {
    preset.problem.layout.coords_k = uniform_sensors(parse_count(key, value));
  } else if (key == "sensors_u") {
    preset.problem.layout.coords_u = uniform_sensors(parse_count(key, value));
  } else if (key == "sensors_f") {
    preset.problem.layout.coords_f = uniform_sensors(parse_count(key, value));
  } else if (key == "sensors_b") {
    int n = parse_count(key, value);
    if (n != 0 && n != 2) throw fail("sensors_b must be 0 or 2");
    preset.problem.layout.coords_b = n == 0 ? std::vector<double>{} : std::vector<double>{-1.0, 1.0};
  } else if (key == "train_count") {
    int n = parse_count(key, value);
    if (n < 1) throw fail("train_count must be positive");
    preset.train_count = n;
  } else if (key == "k_mean") {
    preset.k_hat.mean = parse_real(key, value);
  } else if (key == "k_variance") {
    preset.k_hat.variance = parse_real(key, value);
  } else if (key == "k_width") {
    preset.k_hat.width = parse_real(key, value);
  } else if (key == "f_mean") {
    preset.f.mean = parse_real(key, value);
  } else if (key == "f_variance") {
    preset.f.variance = parse_real(key, value);
  } else if (key == "f_width") {
    preset.f.width = parse_real(key, value);
  } else {
    return apply_config_entry(preset.config, key, value);
  }
  return true;
}

ExperimentPreset resolve_config(std::istream& in, const ExperimentPreset& base) {
  ExperimentPreset out = base;
  std::string line;
  bool seen_entry = false;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string text = trim(line);
    if (text.empty()) continue;
    size_t sep = text.find_first_of(":=");
    if (sep == std::string::npos)
      throw fail("line " + std::to_string(line_no) + " has no key: value separator");
    std::string key = trim(text.substr(0, sep));
    std::string value = trim(text.substr(sep + 1));
    if (key.empty()) throw fail("line " + std::to_string(line_no) + " has an empty key");
    if (key == "preset") {
      if (seen_entry) throw fail("preset must be the first entry");
      const ExperimentPreset* named = find_preset(value);
      if (!named) throw fail("unknown preset '" + value + "'");
      out = *named;
      seen_entry = true;
      continue;
    }
    if (!apply_preset_entry(out, key, value)) throw fail("unknown key '" + key + "'");
    seen_entry = true;
  }
  out.problem.noise_dim = out.config.noise_dim;
  out.validate();
  return out;
}

ExperimentPreset resolve_config_file(const std::filesystem::path& path,
                                     const ExperimentPreset& base) {
  std::ifstream in(path);
  if (!in) throw fail("cannot read " + path.string());
  return resolve_config(in, base);
}

}  // namespace stochlat
