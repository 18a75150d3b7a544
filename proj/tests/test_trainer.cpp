#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "stochlat/trainer.hpp"

using namespace stochlat;

namespace {

ProblemSpec process_problem(int n_f = 4, int noise = 2) {
  ProblemSpec problem;
  problem.mode = ProblemMode::Process;
  problem.layout.coords_f = uniform_sensors(n_f);
  problem.noise_dim = noise;
  return problem;
}

ProblemSpec forward_problem(int noise = 2) {
  ProblemSpec problem;
  problem.mode = ProblemMode::Forward;
  problem.layout.coords_k = uniform_sensors(3);
  problem.layout.coords_f = uniform_sensors(4);
  problem.layout.coords_b = {-1.0, 1.0};
  problem.noise_dim = noise;
  return problem;
}

GaussKernelSpec k_hat_spec() { return {0.0, 4.0 / 25.0, 1.0}; }
GaussKernelSpec f_spec() { return {0.5, 9.0 / 400.0, 1.0 / 25.0}; }

SnapshotSet tiny_dataset(const ProblemSpec& problem, int train_count, uint64_t seed = 7,
                         int pool = 16) {
  return build_dataset(problem, k_hat_spec(), f_spec(), train_count, seed, pool);
}

TrainConfig tiny_config(int epochs, int batch) {
  TrainConfig config;
  config.epochs = epochs;
  config.batch_size = batch;
  config.noise_dim = 2;
  config.hidden_layers = 1;
  config.hidden_width = 8;
  config.learning_rate = 1e-3;
  config.seed = 11;
  return config;
}

}  // namespace

TEST_CASE("process training smoke run: finite losses, final checkpoint") {
  ProblemSpec problem = process_problem();
  SnapshotSet data = tiny_dataset(problem, 8);
  TrainConfig config = tiny_config(2, 8);
  TrainResult result = train_process(data, config);
  CHECK(result.losses.size() == 2);  // one batch per epoch
  for (const auto& row : result.losses) {
    CHECK(std::isfinite(row.encoder_objective));
    CHECK(std::isfinite(row.generator_objective));
  }
  REQUIRE(result.store.records.size() == 1);  // cadence 100 > epochs, final always kept
  CHECK(result.store.records.back().epoch == 2);
  CHECK(result.store.records.back().nets.gen_k.flat.empty());
  CHECK(result.store.records.back().nets.gen_u.config.input_dim == 3);
  CHECK(result.store.records.back().nets.encoder.config.input_dim == 4);
  CHECK(result.store.records.back().nets.encoder.config.output_dim == 2);
}

TEST_CASE("equation training smoke run covers all blocks") {
  ProblemSpec problem = forward_problem();
  SnapshotSet data = tiny_dataset(problem, 8);
  TrainConfig config = tiny_config(2, 4);
  TrainResult result = train_sde(data, problem, config);
  CHECK(result.losses.size() == 4);  // 2 epochs x 2 batches
  for (const auto& row : result.losses) {
    CHECK(std::isfinite(row.encoder_objective));
    CHECK(std::isfinite(row.generator_objective));
  }
  const auto& nets = result.store.records.back().nets;
  CHECK(!nets.gen_k.flat.empty());
  // encoder sees the concatenation K|F|B = 3 + 4 + 2
  CHECK(nets.encoder.config.input_dim == 9);
}

TEST_CASE("fixed seed reproduces the run bitwise; other seeds differ") {
  ProblemSpec problem = forward_problem();
  SnapshotSet data = tiny_dataset(problem, 8);
  TrainConfig config = tiny_config(3, 8);
  TrainResult a = train_sde(data, problem, config);
  TrainResult b = train_sde(data, problem, config);
  CHECK(a.store.records.back().nets.gen_u.flat == b.store.records.back().nets.gen_u.flat);
  CHECK(a.store.records.back().nets.gen_k.flat == b.store.records.back().nets.gen_k.flat);
  CHECK(a.store.records.back().nets.encoder.flat == b.store.records.back().nets.encoder.flat);
  for (size_t i = 0; i < a.losses.size(); ++i) {
    CHECK(a.losses[i].encoder_objective == b.losses[i].encoder_objective);
    CHECK(a.losses[i].generator_objective == b.losses[i].generator_objective);
  }
  config.seed = 12;
  TrainResult c = train_sde(data, problem, config);
  CHECK(a.store.records.back().nets.gen_u.flat != c.store.records.back().nets.gen_u.flat);
}

TEST_CASE("encoder and generator alternate and touch only their own nets") {
  ProblemSpec problem = forward_problem();
  SnapshotSet data = tiny_dataset(problem, 8);
  TrainConfig config = tiny_config(1, 4);

  struct Event {
    StepPhase phase;
    std::vector<double> gen_k, gen_u, encoder;
  };
  std::vector<Event> events;
  auto observer = [&](int64_t, int64_t, StepPhase phase, const TrainedNets& nets) {
    events.push_back({phase, nets.gen_k.flat, nets.gen_u.flat, nets.encoder.flat});
  };
  TrainedNets initial = init_nets(problem, config);
  train_sde(data, problem, config, observer);

  REQUIRE(events.size() == 4);  // 2 batches x 2 phases
  CHECK(events[0].phase == StepPhase::EncoderUpdated);
  CHECK(events[1].phase == StepPhase::GeneratorUpdated);
  CHECK(events[2].phase == StepPhase::EncoderUpdated);
  CHECK(events[3].phase == StepPhase::GeneratorUpdated);
  // encoder update leaves the generators exactly as initialized
  CHECK(events[0].gen_k == initial.gen_k.flat);
  CHECK(events[0].gen_u == initial.gen_u.flat);
  CHECK(events[0].encoder != initial.encoder.flat);
  // generator update leaves the encoder where the encoder step put it
  CHECK(events[1].encoder == events[0].encoder);
  CHECK(events[1].gen_k != events[0].gen_k);
  CHECK(events[1].gen_u != events[0].gen_u);
  // and the second batch continues from there
  CHECK(events[2].gen_k == events[1].gen_k);
  CHECK(events[2].gen_u == events[1].gen_u);
}

TEST_CASE("loss log covers every epoch and batch; short batch dropped") {
  ProblemSpec problem = process_problem();
  SnapshotSet data = tiny_dataset(problem, 10);
  TrainConfig config = tiny_config(3, 4);  // 10 / 4 -> 2 batches, 2 snapshots unused
  TrainResult result = train_process(data, config);
  REQUIRE(result.losses.size() == 6);
  for (int e = 0; e < 3; ++e) {
    CHECK(result.losses[size_t(2 * e)].epoch == e + 1);
    CHECK(result.losses[size_t(2 * e)].batch == 0);
    CHECK(result.losses[size_t(2 * e + 1)].batch == 1);
  }
}

TEST_CASE("checkpoints honor the cadence and always include the final epoch") {
  ProblemSpec problem = process_problem();
  SnapshotSet data = tiny_dataset(problem, 8);
  TrainConfig config = tiny_config(5, 8);
  config.checkpoint_cadence = 2;
  TrainResult result = train_process(data, config);
  REQUIRE(result.store.records.size() == 3);
  CHECK(result.store.records[0].epoch == 2);
  CHECK(result.store.records[1].epoch == 4);
  CHECK(result.store.records[2].epoch == 5);
}

TEST_CASE("single step ascends the encoder objective and descends the generator's") {
  ProblemSpec problem = forward_problem();
  SnapshotSet data = tiny_dataset(problem, 8);
  Eigen::MatrixXd pool = data.matrix();
  TrainConfig config = tiny_config(1, 4);
  config.optimizer = OptimizerConfig::Kind::Sgd;
  config.learning_rate = 1e-5;
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    config.seed = seed;
    TrainedNets nets = init_nets(problem, config);
    Rng rng(seed * 17 + 1);
    StepProbe probe = probe_single_step(problem, config, nets, pool.topRows(4), rng);
    CHECK(probe.encoder_after >= probe.encoder_before - 1e-12);
    CHECK(probe.generator_after <= probe.generator_before + 1e-12);
  }
}

TEST_CASE("noise handling switches change the trajectory") {
  ProblemSpec problem = process_problem();
  SnapshotSet data = tiny_dataset(problem, 8);
  TrainConfig config = tiny_config(3, 8);
  TrainResult base = train_process(data, config);
  config.fresh_noise_between_steps = true;
  TrainResult fresh = train_process(data, config);
  CHECK(base.store.records.back().nets.gen_u.flat != fresh.store.records.back().nets.gen_u.flat);

  config.fresh_noise_between_steps = false;
  config.granularity = MmdGranularity::PerSample;
  TrainResult per_sample = train_process(data, config);
  CHECK(base.store.records.back().nets.gen_u.flat !=
        per_sample.store.records.back().nets.gen_u.flat);
  for (const auto& row : per_sample.losses) CHECK(std::isfinite(row.encoder_objective));
}

TEST_CASE("training rejects inconsistent inputs") {
  ProblemSpec process = process_problem();
  ProblemSpec forward = forward_problem();
  SnapshotSet pdata = tiny_dataset(process, 8);
  SnapshotSet fdata = tiny_dataset(forward, 8);
  TrainConfig config = tiny_config(1, 8);
  CHECK_THROWS(train_process(fdata, config));
  CHECK_THROWS(train_sde(pdata, process, config));
  ProblemSpec other = forward_problem();
  other.layout.coords_f = uniform_sensors(5);
  CHECK_THROWS(train_sde(fdata, other, config));
  config.batch_size = 64;  // exceeds N = 8
  CHECK_THROWS(train_process(pdata, config));
}

namespace {

CheckpointStore synthetic_store(int64_t cadence, int64_t last) {
  CheckpointStore store;
  for (int64_t e = cadence; e <= last; e += cadence) store.records.push_back({e, {}});
  return store;
}

std::vector<int64_t> selected_epochs(const CheckpointStore& store,
                                     const CheckpointSelection& sel) {
  std::vector<int64_t> out;
  for (size_t i : sel.indices) out.push_back(store.records[i].epoch);
  return out;
}

}  // namespace

TEST_CASE("checkpoint selection spans the trailing window uniformly") {
  CheckpointStore store = synthetic_store(100, 10000);
  CheckpointSelection sel = checkpoint_select(store, 30, 3000);
  CHECK(!sel.short_history);
  auto epochs = selected_epochs(store, sel);
  REQUIRE(epochs.size() == 30);
  for (int i = 0; i < 30; ++i) CHECK(epochs[size_t(i)] == 7100 + 100 * i);

  CheckpointStore shifted = synthetic_store(100, 5000);
  auto epochs2 = selected_epochs(shifted, checkpoint_select(shifted, 30, 3000));
  REQUIRE(epochs2.size() == 30);
  CHECK(epochs2.front() == 2100);
  CHECK(epochs2.back() == 5000);
}

TEST_CASE("checkpoint selection degrades gracefully") {
  CheckpointStore store = synthetic_store(100, 500);
  CheckpointSelection sel = checkpoint_select(store, 30, 3000);
  CHECK(sel.short_history);
  CHECK(sel.indices.size() == 5);

  // cadence that does not divide the spacing: snapped to nearest, ends exact
  CheckpointStore odd = synthetic_store(70, 700);
  CheckpointSelection snapped = checkpoint_select(odd, 3, 300);
  auto epochs = selected_epochs(odd, snapped);
  CHECK(epochs.back() == 700);
  for (size_t i = 1; i < epochs.size(); ++i) CHECK(epochs[i] > epochs[i - 1]);
  CHECK_THROWS(checkpoint_select(CheckpointStore{}, 30, 3000));
}

TEST_CASE("config entries round trip and reject unknown keys") {
  TrainConfig config;
  config.epochs = 123;
  config.batch_size = 7;
  config.learning_rate = 3.5e-4;
  config.noise_dim = 9;
  config.optimizer = OptimizerConfig::Kind::Sgd;
  config.seed = 99;
  config.mmd.mode = MmdConfig::BandwidthMode::FixedList;
  config.mmd.fixed_sigma2 = {0.5, 2.0};
  config.granularity = MmdGranularity::PerSample;
  config.resample = ResampleMode::FixedSubset;
  config.fresh_noise_between_steps = true;

  std::ostringstream text;
  write_config_entries(text, config);
  TrainConfig parsed;
  std::istringstream in(text.str());
  std::string line;
  while (std::getline(in, line)) {
    auto colon = line.find(": ");
    REQUIRE(colon != std::string::npos);
    CHECK(apply_config_entry(parsed, line.substr(0, colon), line.substr(colon + 2)));
  }
  CHECK(config_hash(parsed) == config_hash(config));
  CHECK(parsed.epochs == 123);
  CHECK(parsed.mmd.fixed_sigma2 == std::vector<double>{0.5, 2.0});
  CHECK(parsed.granularity == MmdGranularity::PerSample);

  TrainConfig other;
  CHECK(!apply_config_entry(other, "lerning_rate", "0.1"));
  CHECK_THROWS(apply_config_entry(other, "learning_rate", "fast"));
  CHECK(config_hash(other) != config_hash(config));
}

TEST_CASE("run directory round trips bitwise") {
  ProblemSpec problem = forward_problem();
  SnapshotSet data = tiny_dataset(problem, 8);
  TrainConfig config = tiny_config(3, 8);
  config.checkpoint_cadence = 2;
  TrainResult result = train_sde(data, problem, config);

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "stochlat-test-run";
  fs::remove_all(dir);
  save_run(dir, result);
  TrainResult loaded = load_run(dir);
  fs::remove_all(dir);

  CHECK(loaded.store.mode == result.store.mode);
  CHECK(loaded.store.layout == result.store.layout);
  CHECK(config_hash(loaded.store.config) == config_hash(result.store.config));
  REQUIRE(loaded.store.records.size() == result.store.records.size());
  for (size_t i = 0; i < loaded.store.records.size(); ++i) {
    CHECK(loaded.store.records[i].epoch == result.store.records[i].epoch);
    CHECK(loaded.store.records[i].nets.gen_k.flat == result.store.records[i].nets.gen_k.flat);
    CHECK(loaded.store.records[i].nets.gen_u.flat == result.store.records[i].nets.gen_u.flat);
    CHECK(loaded.store.records[i].nets.encoder.flat == result.store.records[i].nets.encoder.flat);
  }
  REQUIRE(loaded.losses.size() == result.losses.size());
  for (size_t i = 0; i < loaded.losses.size(); ++i) {
    CHECK(loaded.losses[i].epoch == result.losses[i].epoch);
    CHECK(loaded.losses[i].encoder_objective == result.losses[i].encoder_objective);
    CHECK(loaded.losses[i].generator_objective == result.losses[i].generator_objective);
  }
}
