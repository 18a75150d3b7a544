#include "stochlat/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace stochlat {

OptimizerConfig TrainConfig::optimizer_config() const {
  OptimizerConfig out;
  out.kind = optimizer;
  out.learning_rate = learning_rate;
  out.beta1 = beta1;
  out.beta2 = beta2;
  out.epsilon = epsilon;
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::runtime_error("train config: epochs must be at least 1");
  if (batch_size < 1) throw std::runtime_error("train config: batch size must be at least 1");
  if (noise_dim < 1) throw std::runtime_error("train config: noise dimension must be at least 1");
  if (hidden_layers < 0 || (hidden_layers > 0 && hidden_width < 1))
    throw std::runtime_error("train config: bad hidden shape");
  if (checkpoint_cadence < 1)
    throw std::runtime_error("train config: checkpoint cadence must be at least 1");
  optimizer_config().validate();
  mmd.validate();
}

TrainedNets init_nets(const ProblemSpec& problem, const TrainConfig& config) {
  problem.validate();
  config.validate();
  MlpConfig gen_cfg{1 + config.noise_dim, 1, config.hidden_layers, config.hidden_width};
  MlpConfig enc_cfg{int(problem.snapshot_length()), config.noise_dim, config.hidden_layers,
                    config.hidden_width};
  TrainedNets nets;
  if (problem.mode != ProblemMode::Process)
    nets.gen_k = init_mlp(gen_cfg, Rng::stream(config.seed, 101).next_bits());
  nets.gen_u = init_mlp(gen_cfg, Rng::stream(config.seed, 102).next_bits());
  nets.encoder = init_mlp(enc_cfg, Rng::stream(config.seed, 103).next_bits());
  return nets;
}

namespace {

Eigen::MatrixXd normal_matrix(Rng& rng, long rows, long cols) {
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

[[noreturn]] void fail_diverged(const char* which, int64_t epoch, int64_t batch) {
  throw std::runtime_error("training diverged: non-finite " + std::string(which) +
                           " objective at epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(batch));
}

// One adversarial batch step plus the loop-independent plumbing around it.
// The probe path re-evaluates both objectives on the frozen batch after each
// update; it reuses the stored noise so no extra randomness is consumed.
class Session {
 public:
  Session(const ProblemSpec& problem, const TrainConfig& config, TrainedNets& nets)
      : problem_(problem),
        config_(config),
        nets_(nets),
        opt_enc_(config.optimizer_config(), nets.encoder.flat.size()),
        opt_u_(config.optimizer_config(), nets.gen_u.flat.size()),
        grad_enc_(nets.encoder.flat.size()),
        grad_u_(nets.gen_u.flat.size()) {
    if (problem_.mode != ProblemMode::Process) {
      opt_k_.emplace(config.optimizer_config(), nets.gen_k.flat.size());
      grad_k_.resize(nets.gen_k.flat.size());
    }
  }

  struct Outcome {
    double encoder_objective = 0;
    double generator_objective = 0;
  };

  Outcome step(const Eigen::MatrixXd& H, Rng& rng, int64_t epoch, int64_t batch,
               const StepObserver& observer, StepProbe* probe) {
    const long n = H.rows();
    const int m = config_.noise_dim;
    Eigen::MatrixXd xi = normal_matrix(rng, n, m);

    // encoder ascent: z_real from data, reconstruction through the frozen
    // generator, synthetic batch from noise, and its encoding
    DenseTrace tr_enc_real;
    Eigen::MatrixXd z_real = dense_forward(nets_.encoder, H, &tr_enc_real);
    SynthTrace tr_hat;
    Eigen::MatrixXd H_hat = synth(z_real, &tr_hat);
    SynthTrace tr_tilde;
    Eigen::MatrixXd H_tilde = synth(xi, &tr_tilde);
    DenseTrace tr_enc_gen;
    Eigen::MatrixXd z_gen = dense_forward(nets_.encoder, H_tilde, &tr_enc_gen);

    Eigen::MatrixXd z_prior = normal_matrix(rng, n, m);
    Eigen::MatrixXd d_zgen, d_zreal, d_hat;
    const double gen_match = latent_term(z_gen, z_prior, &d_zgen);
    const double real_match = latent_term(z_real, z_prior, &d_zreal);
    const double recon = pair_mmd_mean_value_grad(H_hat, H, config_.mmd, &d_hat);
    const double encoder_objective = gen_match - real_match - recon;
    if (!std::isfinite(encoder_objective)) fail_diverged("encoder", epoch, batch);

    // gradient of the (maximized) objective w.r.t. the encoder: the
    // reconstruction reaches it through the generator's latent inputs
    Eigen::MatrixXd d_latents;
    d_hat *= -1.0;
    synth_backward(tr_hat, d_hat, false, &d_latents);
    Eigen::MatrixXd d_zreal_total = d_latents - d_zreal;
    std::fill(grad_enc_.begin(), grad_enc_.end(), 0.0);
    dense_backward(nets_.encoder, tr_enc_gen, d_zgen, grad_enc_);
    dense_backward(nets_.encoder, tr_enc_real, d_zreal_total, grad_enc_);
    for (double& g : grad_enc_) g = -g;  // ascend
    opt_enc_.step(nets_.encoder.flat, grad_enc_);
    if (observer) observer(epoch, batch, StepPhase::EncoderUpdated, nets_);
    if (probe) {
      probe->encoder_before = encoder_objective;
      probe->encoder_after = eval_encoder_objective(H, H_tilde, z_prior);
    }

    // generator descent under the updated encoder, same noise unless the
    // fresh-noise switch is on
    if (config_.fresh_noise_between_steps) {
      xi = normal_matrix(rng, n, m);
      H_tilde = synth(xi, &tr_tilde);
    }
    DenseTrace tr_enc_gen2;
    Eigen::MatrixXd z_gen2 = dense_forward(nets_.encoder, H_tilde, &tr_enc_gen2);
    Eigen::MatrixXd z_prior2 = normal_matrix(rng, n, m);
    Eigen::MatrixXd d_zgen2, d_tilde;
    const double gen_match2 = latent_term(z_gen2, z_prior2, &d_zgen2);
    const double snap_match = snapshot_term(H_tilde, H, &d_tilde);
    const double generator_objective = gen_match2 + snap_match;
    if (!std::isfinite(generator_objective)) fail_diverged("generator", epoch, batch);

    Eigen::MatrixXd d_tilde_enc;
    dense_backward(nets_.encoder, tr_enc_gen2, d_zgen2, {}, &d_tilde_enc);
    d_tilde += d_tilde_enc;
    std::fill(grad_u_.begin(), grad_u_.end(), 0.0);
    std::fill(grad_k_.begin(), grad_k_.end(), 0.0);
    synth_backward(tr_tilde, d_tilde, true, nullptr);
    if (opt_k_) opt_k_->step(nets_.gen_k.flat, grad_k_);
    opt_u_.step(nets_.gen_u.flat, grad_u_);
    if (observer) observer(epoch, batch, StepPhase::GeneratorUpdated, nets_);
    if (probe) {
      probe->generator_before = generator_objective;
      probe->generator_after = eval_generator_objective(H, xi, z_prior2);
    }
    return {encoder_objective, generator_objective};
  }

 private:
  struct SynthTrace {
    SyntheticBatchTrace sde;
    DenseTrace process;
  };

  Eigen::MatrixXd synth(const Eigen::MatrixXd& latents, SynthTrace* trace) const {
    if (problem_.mode == ProblemMode::Process)
      return value_batch(nets_.gen_u, problem_.layout.coords_f, latents,
                         trace ? &trace->process : nullptr);
    return synthetic_batch(nets_.gen_k, nets_.gen_u, problem_.layout, latents,
                           trace ? &trace->sde : nullptr);
  }

  void synth_backward(const SynthTrace& trace, const Eigen::MatrixXd& d_snapshots,
                      bool want_grads, Eigen::MatrixXd* d_latents) {
    std::span<double> gk = want_grads ? std::span<double>(grad_k_) : std::span<double>();
    std::span<double> gu = want_grads ? std::span<double>(grad_u_) : std::span<double>();
    if (problem_.mode == ProblemMode::Process)
      value_batch_backward(nets_.gen_u, trace.process, d_snapshots, gu, d_latents);
    else
      synthetic_batch_backward(nets_.gen_k, nets_.gen_u, problem_.layout, trace.sde, d_snapshots,
                               gk, gu, d_latents);
  }

  double latent_term(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                     Eigen::MatrixXd* da) const {
    if (config_.granularity == MmdGranularity::Batch)
      return mmd_biased_value_grad(a, b, config_.mmd, da, nullptr);
    return pair_mmd_mean_value_grad(a, b, config_.mmd, da);
  }

  double snapshot_term(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                       Eigen::MatrixXd* da) const {
    return latent_term(a, b, da);
  }

  double eval_encoder_objective(const Eigen::MatrixXd& H, const Eigen::MatrixXd& H_tilde,
                                const Eigen::MatrixXd& z_prior) const {
    Eigen::MatrixXd z_real = dense_forward(nets_.encoder, H);
    Eigen::MatrixXd H_hat = synth(z_real, nullptr);
    Eigen::MatrixXd z_gen = dense_forward(nets_.encoder, H_tilde);
    return latent_term(z_gen, z_prior, nullptr) - latent_term(z_real, z_prior, nullptr) -
           pair_mmd_mean_value_grad(H_hat, H, config_.mmd, nullptr);
  }

  double eval_generator_objective(const Eigen::MatrixXd& H, const Eigen::MatrixXd& xi,
                                  const Eigen::MatrixXd& z_prior) const {
    Eigen::MatrixXd H_tilde = synth(xi, nullptr);
    Eigen::MatrixXd z_gen = dense_forward(nets_.encoder, H_tilde);
    return latent_term(z_gen, z_prior, nullptr) + latent_term(H_tilde, H, nullptr);
  }

  const ProblemSpec& problem_;
  const TrainConfig& config_;
  TrainedNets& nets_;
  Optimizer opt_enc_;
  Optimizer opt_u_;
  std::optional<Optimizer> opt_k_;
  std::vector<double> grad_enc_, grad_u_, grad_k_;
};

// indices of this epoch's working set, in batch order
std::vector<size_t> working_indices(Rng& rng, size_t pool, size_t take, ResampleMode mode,
                                    std::vector<size_t>& scratch) {
  if (mode == ResampleMode::EpochResample) {
    scratch.resize(pool);
    for (size_t i = 0; i < pool; ++i) scratch[i] = i;
    for (size_t i = 0; i < take; ++i)
      std::swap(scratch[i], scratch[i + size_t(rng.below(pool - i))]);
    return {scratch.begin(), scratch.begin() + long(take)};
  }
  std::vector<size_t> idx(take);
  for (size_t i = 0; i < take; ++i) idx[i] = i;
  for (size_t i = take - 1; i > 0; --i) std::swap(idx[i], idx[size_t(rng.below(i + 1))]);
  return idx;
}

TrainResult train_impl(const SnapshotSet& dataset, const ProblemSpec& problem,
                       const TrainConfig& config, const StepObserver& observer) {
  config.validate();
  problem.validate();
  dataset.validate();
  if (!(dataset.layout == problem.layout))
    throw std::runtime_error("train: dataset sensor layout does not match the problem");
  const size_t N = size_t(dataset.provenance.train_count);
  if (N == 0 || N > dataset.count())
    throw std::runtime_error("train: training count not covered by the dataset pool");
  const size_t batches = N / size_t(config.batch_size);
  if (batches == 0) throw std::runtime_error("train: batch size exceeds the training-set size");

  const Eigen::MatrixXd pool = dataset.matrix();
  TrainResult result;
  result.store.mode = problem.mode;
  result.store.layout = problem.layout;
  result.store.config = config;

  TrainedNets nets = init_nets(problem, config);
  Session session(problem, config, nets);
  Rng train_rng = Rng::stream(config.seed, 2);
  Rng shuffle_rng = Rng::stream(config.seed, 3);
  std::vector<size_t> scratch;
  Eigen::MatrixXd H(config.batch_size, pool.cols());

  for (int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    auto idx = working_indices(shuffle_rng, dataset.count(), N, config.resample, scratch);
    for (size_t b = 0; b < batches; ++b) {
      for (long r = 0; r < H.rows(); ++r)
        H.row(r) = pool.row(long(idx[b * size_t(config.batch_size) + size_t(r)]));
      auto outcome = session.step(H, train_rng, epoch, int64_t(b), observer, nullptr);
      result.losses.push_back(
          {epoch, int64_t(b), outcome.encoder_objective, outcome.generator_objective});
    }
    if (epoch % config.checkpoint_cadence == 0 || epoch == config.epochs)
      result.store.records.push_back({epoch, nets});
  }
  return result;
}

}  // namespace

TrainResult train_process(const SnapshotSet& dataset, const TrainConfig& config,
                          const StepObserver& observer) {
  if (dataset.provenance.mode != ProblemMode::Process)
    throw std::runtime_error("train_process: dataset was not generated in process mode");
  ProblemSpec problem{ProblemMode::Process, dataset.layout, config.noise_dim};
  return train_impl(dataset, problem, config, observer);
}

TrainResult train_sde(const SnapshotSet& dataset, const ProblemSpec& problem,
                      const TrainConfig& config, const StepObserver& observer) {
  if (problem.mode == ProblemMode::Process)
    throw std::runtime_error("train_sde: use train_process for process approximation");
  return train_impl(dataset, problem, config, observer);
}

StepProbe probe_single_step(const ProblemSpec& problem, const TrainConfig& config,
                            TrainedNets& nets, const Eigen::MatrixXd& batch, Rng& rng) {
  Session session(problem, config, nets);
  StepProbe probe;
  session.step(batch, rng, 0, 0, {}, &probe);
  return probe;
}

CheckpointSelection checkpoint_select(const CheckpointStore& store, int count, int64_t window) {
  if (store.records.empty()) throw std::runtime_error("checkpoint_select: empty store");
  if (count < 1 || window < 1) throw std::runtime_error("checkpoint_select: bad arguments");
  const int64_t end = store.records.back().epoch;
  const int64_t lo = end - window;  // exclusive
  std::vector<size_t> in_window;
  for (size_t i = 0; i < store.records.size(); ++i)
    if (store.records[i].epoch > lo) in_window.push_back(i);

  CheckpointSelection out;
  if (long(in_window.size()) <= count) {
    out.indices = in_window;
    out.short_history = long(in_window.size()) < count;
    return out;
  }
  for (int i = 1; i <= count; ++i) {
    const double target = double(lo) + double(i) * double(window) / double(count);
    size_t best = in_window.front();
    double best_dist = std::abs(double(store.records[best].epoch) - target);
    for (size_t idx : in_window) {
      double dist = std::abs(double(store.records[idx].epoch) - target);
      if (dist < best_dist) {
        best = idx;
        best_dist = dist;
      }
    }
    if (out.indices.empty() || out.indices.back() != best) out.indices.push_back(best);
  }
  out.short_history = long(out.indices.size()) < count;
  return out;
}

namespace {

const char* optimizer_name(OptimizerConfig::Kind k) {
  return k == OptimizerConfig::Kind::Adam ? "adam" : "sgd";
}

std::string fmt_double_list(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += fmt_g17(values[i]);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream ss(text);
  double v;
  while (ss >> v) out.push_back(v);
  if (!ss.eof()) throw std::runtime_error("malformed number list: " + text);
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("bad value for " + key + ": " + value);
  }
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    int64_t v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("bad value for " + key + ": " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::runtime_error("bad value for " + key + ": " + value);
}

}  // namespace

void write_config_entries(std::ostream& out, const TrainConfig& config) {
  out << "epochs: " << config.epochs << '\n';
  out << "batch_size: " << config.batch_size << '\n';
  out << "learning_rate: " << fmt_g17(config.learning_rate) << '\n';
  out << "noise_dim: " << config.noise_dim << '\n';
  out << "hidden_layers: " << config.hidden_layers << '\n';
  out << "hidden_width: " << config.hidden_width << '\n';
  out << "optimizer: " << optimizer_name(config.optimizer) << '\n';
  out << "beta1: " << fmt_g17(config.beta1) << '\n';
  out << "beta2: " << fmt_g17(config.beta2) << '\n';
  out << "epsilon: " << fmt_g17(config.epsilon) << '\n';
  out << "seed: " << config.seed << '\n';
  out << "checkpoint_cadence: " << config.checkpoint_cadence << '\n';
  out << "mmd_bandwidths: "
      << (config.mmd.mode == MmdConfig::BandwidthMode::MedianHeuristic ? "median" : "fixed")
      << '\n';
  out << "mmd_multipliers: " << fmt_double_list(config.mmd.multipliers) << '\n';
  out << "mmd_fixed_sigma2: " << fmt_double_list(config.mmd.fixed_sigma2) << '\n';
  out << "mmd_floor: " << fmt_g17(config.mmd.floor) << '\n';
  out << "granularity: "
      << (config.granularity == MmdGranularity::Batch ? "batch" : "per-sample") << '\n';
  out << "resample: "
      << (config.resample == ResampleMode::EpochResample ? "epoch-resample" : "fixed-subset")
      << '\n';
  out << "fresh_noise_between_steps: " << (config.fresh_noise_between_steps ? "true" : "false")
      << '\n';
}

bool apply_config_entry(TrainConfig& config, const std::string& key, const std::string& value) {
  if (key == "epochs") config.epochs = parse_int(key, value);
  else if (key == "batch_size") config.batch_size = int(parse_int(key, value));
  else if (key == "learning_rate") config.learning_rate = parse_double(key, value);
  else if (key == "noise_dim") config.noise_dim = int(parse_int(key, value));
  else if (key == "hidden_layers") config.hidden_layers = int(parse_int(key, value));
  else if (key == "hidden_width") config.hidden_width = int(parse_int(key, value));
  else if (key == "optimizer") {
    if (value == "adam") config.optimizer = OptimizerConfig::Kind::Adam;
    else if (value == "sgd") config.optimizer = OptimizerConfig::Kind::Sgd;
    else throw std::runtime_error("bad value for optimizer: " + value);
  } else if (key == "beta1") config.beta1 = parse_double(key, value);
  else if (key == "beta2") config.beta2 = parse_double(key, value);
  else if (key == "epsilon") config.epsilon = parse_double(key, value);
  else if (key == "seed") config.seed = uint64_t(parse_int(key, value));
  else if (key == "checkpoint_cadence") config.checkpoint_cadence = parse_int(key, value);
  else if (key == "mmd_bandwidths") {
    if (value == "median") config.mmd.mode = MmdConfig::BandwidthMode::MedianHeuristic;
    else if (value == "fixed") config.mmd.mode = MmdConfig::BandwidthMode::FixedList;
    else throw std::runtime_error("bad value for mmd_bandwidths: " + value);
  } else if (key == "mmd_multipliers") config.mmd.multipliers = parse_double_list(value);
  else if (key == "mmd_fixed_sigma2") config.mmd.fixed_sigma2 = parse_double_list(value);
  else if (key == "mmd_floor") config.mmd.floor = parse_double(key, value);
  else if (key == "granularity") {
    if (value == "batch") config.granularity = MmdGranularity::Batch;
    else if (value == "per-sample") config.granularity = MmdGranularity::PerSample;
    else throw std::runtime_error("bad value for granularity: " + value);
  } else if (key == "resample") {
    if (value == "epoch-resample") config.resample = ResampleMode::EpochResample;
    else if (value == "fixed-subset") config.resample = ResampleMode::FixedSubset;
    else throw std::runtime_error("bad value for resample: " + value);
  } else if (key == "fresh_noise_between_steps")
    config.fresh_noise_between_steps = parse_bool(key, value);
  else return false;
  return true;
}

uint64_t config_hash(const TrainConfig& config) {
  std::ostringstream text;
  write_config_entries(text, config);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string checkpoint_filename(int64_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "checkpoint-%08lld.bin", (long long)epoch);
  return buf;
}

void save_checkpoint_file(const std::filesystem::path& path, const CheckpointRecord& record,
                          ProblemMode mode, uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const bool process = mode == ProblemMode::Process;
  out << "stochlat-checkpoint v1\n";
  out << "epoch: " << record.epoch << '\n';
  out << "nets: " << (process ? 2 : 3) << '\n';
  if (!process) save_mlp(out, record.nets.gen_k, seed, record.epoch);
  save_mlp(out, record.nets.gen_u, seed, record.epoch);
  save_mlp(out, record.nets.encoder, seed, record.epoch);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

CheckpointRecord load_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "stochlat-checkpoint v1")
    throw std::runtime_error("not a checkpoint file: " + path.string());
  CheckpointRecord record;
  int nets = 0;
  for (int i = 0; i < 2; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated checkpoint header");
    auto colon = line.find(": ");
    if (colon == std::string::npos) throw std::runtime_error("bad checkpoint header: " + line);
    const std::string key = line.substr(0, colon);
    const std::string value = line.substr(colon + 2);
    if (key == "epoch") record.epoch = parse_int(key, value);
    else if (key == "nets") nets = int(parse_int(key, value));
    else throw std::runtime_error("bad checkpoint header: " + line);
  }
  if (nets != 2 && nets != 3) throw std::runtime_error("bad net count in " + path.string());
  if (nets == 3) record.nets.gen_k = load_mlp(in).params;
  record.nets.gen_u = load_mlp(in).params;
  record.nets.encoder = load_mlp(in).params;
  return record;
}

std::string fmt_coord_list(const std::vector<double>& coords) { return fmt_double_list(coords); }

}  // namespace

void save_run(const std::filesystem::path& dir, const TrainResult& result) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.txt").string());
    out << "stochlat-run v1\n";
    out << "mode: " << problem_mode_name(result.store.mode) << '\n';
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", (unsigned long long)config_hash(result.store.config));
    out << "config_hash: " << hash << '\n';
    out << "layout_k: " << fmt_coord_list(result.store.layout.coords_k) << '\n';
    out << "layout_u: " << fmt_coord_list(result.store.layout.coords_u) << '\n';
    out << "layout_f: " << fmt_coord_list(result.store.layout.coords_f) << '\n';
    out << "layout_b: " << fmt_coord_list(result.store.layout.coords_b) << '\n';
    out << "epoch_list:";
    for (const auto& r : result.store.records) out << ' ' << r.epoch;
    out << '\n';
    write_config_entries(out, result.store.config);
    if (!out) throw std::runtime_error("write failed: manifest.txt");
  }
  {
    std::ofstream out(dir / "losses.csv");
    out << "epoch,batch,encoder_objective,generator_objective\n";
    for (const auto& row : result.losses)
      out << row.epoch << ',' << row.batch << ',' << fmt_g17(row.encoder_objective) << ','
          << fmt_g17(row.generator_objective) << '\n';
    if (!out) throw std::runtime_error("write failed: losses.csv");
  }
  for (const auto& record : result.store.records)
    save_checkpoint_file(dir / checkpoint_filename(record.epoch), record, result.store.mode,
                         result.store.config.seed);
}

TrainResult load_run(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw std::runtime_error("cannot read " + (dir / "manifest.txt").string());
  std::string line;
  if (!std::getline(in, line) || line != "stochlat-run v1")
    throw std::runtime_error("not a run directory: " + dir.string());
  TrainResult result;
  std::vector<int64_t> epochs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw std::runtime_error("bad manifest line: " + line);
    const std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 1);
    if (!value.empty() && value.front() == ' ') value.erase(0, 1);
    if (key == "mode") result.store.mode = parse_problem_mode(value);
    else if (key == "config_hash") continue;  // informational; recomputed below
    else if (key == "layout_k") result.store.layout.coords_k = parse_double_list(value);
    else if (key == "layout_u") result.store.layout.coords_u = parse_double_list(value);
    else if (key == "layout_f") result.store.layout.coords_f = parse_double_list(value);
    else if (key == "layout_b") result.store.layout.coords_b = parse_double_list(value);
    else if (key == "epoch_list") {
      for (double v : parse_double_list(value)) epochs.push_back(int64_t(v));
    } else if (!apply_config_entry(result.store.config, key, value))
      throw std::runtime_error("unknown manifest key: " + key);
  }
  for (int64_t epoch : epochs) {
    CheckpointRecord record = load_checkpoint_file(dir / checkpoint_filename(epoch));
    if (record.epoch != epoch) throw std::runtime_error("checkpoint epoch mismatch");
    result.store.records.push_back(std::move(record));
  }
  std::ifstream csv(dir / "losses.csv");
  if (csv) {
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      LossRow row;
      char* end = nullptr;
      row.epoch = std::strtoll(line.c_str(), &end, 10);
      if (*end != ',') throw std::runtime_error("bad loss row: " + line);
      row.batch = std::strtoll(end + 1, &end, 10);
      if (*end != ',') throw std::runtime_error("bad loss row: " + line);
      row.encoder_objective = std::strtod(end + 1, &end);
      if (*end != ',') throw std::runtime_error("bad loss row: " + line);
      row.generator_objective = std::strtod(end + 1, &end);
      result.losses.push_back(row);
    }
  }
  return result;
}

}  // namespace stochlat
