#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "stochlat/batch_eval.hpp"
#include "stochlat/dataset.hpp"
#include "stochlat/objectives.hpp"
#include "stochlat/optimizer.hpp"
#include "stochlat/rng.hpp"

namespace stochlat {

// How the per-epoch working set of N snapshots relates to the generated pool:
// draw a fresh subset each epoch, or keep the first N and only reshuffle the
// batch composition.
enum class ResampleMode { EpochResample, FixedSubset };

struct TrainConfig {
  int64_t epochs = 10000;
  int batch_size = 500;
  double learning_rate = 1e-4;
  int noise_dim = 4;  // latent dimension m, shared by noise input and prior
  int hidden_layers = 4;
  int hidden_width = 128;
  OptimizerConfig::Kind optimizer = OptimizerConfig::Kind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t seed = 0;
  int64_t checkpoint_cadence = 100;
  MmdConfig mmd;
  MmdGranularity granularity = MmdGranularity::Batch;
  ResampleMode resample = ResampleMode::EpochResample;
  bool fresh_noise_between_steps = false;  // redraw xi before the generator step

  OptimizerConfig optimizer_config() const;
  void validate() const;
};

// gen_k stays empty in process mode, where the single field net is gen_u.
struct TrainedNets {
  MlpParams gen_k;
  MlpParams gen_u;
  MlpParams encoder;
};

struct CheckpointRecord {
  int64_t epoch = 0;
  TrainedNets nets;
};

struct CheckpointStore {
  ProblemMode mode = ProblemMode::Process;
  SensorLayout layout;
  TrainConfig config;
  std::vector<CheckpointRecord> records;  // epochs strictly increasing
};

struct LossRow {
  int64_t epoch = 0;
  int64_t batch = 0;
  double encoder_objective = 0;
  double generator_objective = 0;
};

struct TrainResult {
  CheckpointStore store;
  std::vector<LossRow> losses;  // one row per batch
};

enum class StepPhase { EncoderUpdated, GeneratorUpdated };
using StepObserver =
    std::function<void(int64_t epoch, int64_t batch, StepPhase, const TrainedNets&)>;

// Fresh nets for a problem: two scalar generators (or one in process mode)
// with input 1 + noise_dim, and an encoder mapping whole snapshots to the
// latent space. Seeds are derived from config.seed.
TrainedNets init_nets(const ProblemSpec& problem, const TrainConfig& config);

// Alternating adversarial training. Per epoch the working set is drawn from
// the dataset pool and split into batches of batch_size (a short final batch
// is dropped). Per batch: encode real snapshots, reconstruct them through
// the generator, synthesize from fresh noise, encode that, take one encoder
// ascent step, re-encode the same synthetic batch under the updated encoder,
// and take one generator descent step. Checkpoints are recorded every
// checkpoint_cadence epochs and at the final epoch.
TrainResult train_process(const SnapshotSet& dataset, const TrainConfig& config,
                          const StepObserver& observer = {});
TrainResult train_sde(const SnapshotSet& dataset, const ProblemSpec& problem,
                      const TrainConfig& config, const StepObserver& observer = {});

// One batch through the ordinary training step, with the objectives
// re-evaluated on the same frozen batch and noise draws after each update.
// Lets tests verify the ascent/descent directions on the real code path.
struct StepProbe {
  double encoder_before = 0, encoder_after = 0;
  double generator_before = 0, generator_after = 0;
};
StepProbe probe_single_step(const ProblemSpec& problem, const TrainConfig& config,
                            TrainedNets& nets, const Eigen::MatrixXd& batch, Rng& rng);

// Uniform spread of `count` checkpoints over the trailing `window` epochs:
// targets end-window+window/count, ..., end, each snapped to the nearest
// recorded epoch. Fewer distinct records than requested sets short_history
// and returns what exists.
struct CheckpointSelection {
  std::vector<size_t> indices;
  bool short_history = false;
};
CheckpointSelection checkpoint_select(const CheckpointStore& store, int count = 30,
                                      int64_t window = 3000);

uint64_t config_hash(const TrainConfig& config);

// Key/value (de)serialization of TrainConfig, shared by run manifests and
// config files. apply_config_entry returns false for unknown keys and
// throws on malformed values.
void write_config_entries(std::ostream& out, const TrainConfig& config);
bool apply_config_entry(TrainConfig& config, const std::string& key, const std::string& value);

// Run directory: manifest.txt, losses.csv, and one self-describing
// checkpoint-<epoch>.bin per record holding the nets back to back.
void save_run(const std::filesystem::path& dir, const TrainResult& result);
TrainResult load_run(const std::filesystem::path& dir);

}  // namespace stochlat
