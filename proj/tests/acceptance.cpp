// Acceptance gate: every release criterion as one runnable check with its
// stated tolerance, printed as a single PASS/FAIL line. Criteria 6 and 7
// train real (reduced-scale) models and take minutes to hours; the ctest
// registration splits them out with their own timeouts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "stochlat/batch_eval.hpp"
#include "stochlat/dataset.hpp"
#include "stochlat/elliptic.hpp"
#include "stochlat/gp.hpp"
#include "stochlat/gradcheck.hpp"
#include "stochlat/metrics.hpp"
#include "stochlat/mlp.hpp"
#include "stochlat/mmd.hpp"
#include "stochlat/presets.hpp"
#include "stochlat/trainer.hpp"

using namespace stochlat;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---- 1: nested jet gradients against central finite differences ---------

Outcome jet_gradient_check() {
  Rng rng(1001);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    MlpConfig cfg;
    cfg.input_dim = 1 + int(rng.below(3));
    cfg.output_dim = 1;
    cfg.hidden_layers = int(rng.below(4));
    cfg.hidden_width = 1 + int(rng.below(16));
    MlpParams params = init_mlp(cfg, rng.next_bits());
    for (double& v : params.flat) v = 0.8 * v + 0.2 * rng.normal();

    struct Probe {
      double x, a, b, c;
      std::vector<double> aux;
    };
    std::vector<Probe> probes(3);
    for (Probe& p : probes) {
      p.x = 2 * rng.uniform() - 1;
      p.a = 2 * rng.uniform() - 1;
      p.b = 2 * rng.uniform() - 1;
      p.c = 2 * rng.uniform() - 1;
      for (int i = 1; i < cfg.input_dim; ++i) p.aux.push_back(rng.normal());
    }

    auto build = [&](Graph& g, std::span<const NodeId> leaves) {
      MlpGraph net{cfg, std::vector<NodeId>(leaves.begin(), leaves.end())};
      NodeId total = g.zero();
      for (const Probe& p : probes) {
        std::vector<NodeId> aux;
        for (double v : p.aux) aux.push_back(g.constant(v));
        SpatialJet jet = mlp_spatial_jet(g, net, g.constant(p.x), aux);
        std::pair<NodeId, NodeId> terms[] = {{jet.value, g.constant(p.a)},
                                             {jet.d1, g.constant(p.b)},
                                             {jet.d2, g.constant(p.c)}};
        total = g.add(total, g.square(g.affine(terms, 0.0)));
      }
      return total;
    };

    GradCheckReport report = check_gradient(build, params.flat, 1e-4, 1e-4);
    worst = std::max(worst, report.max_rel);
    if (!report.pass)
      return {false, "trial " + std::to_string(trial) + ": max relative error " +
                         fmt(report.max_rel) + " exceeds 1e-4"};
  }
  return {true, "100 networks, worst relative error " + fmt(worst)};
}

// ---- 2: kernel-distance estimator against a brute-force double sum ------

double brute_median_sq_dist(const std::vector<std::vector<double>>& pool) {
  std::vector<double> d2;
  for (size_t i = 0; i < pool.size(); ++i) {
    for (size_t j = i + 1; j < pool.size(); ++j) {
      double s = 0;
      for (size_t c = 0; c < pool[i].size(); ++c) {
        double d = pool[i][c] - pool[j][c];
        s += d * d;
      }
      d2.push_back(s);
    }
  }
  if (d2.empty()) return 1e-12;
  std::sort(d2.begin(), d2.end());
  size_t n = d2.size();
  double med = n % 2 ? d2[n / 2] : 0.5 * (d2[n / 2 - 1] + d2[n / 2]);
  return std::max(med, 1e-12);
}

double brute_mmd(const std::vector<std::vector<double>>& X,
                 const std::vector<std::vector<double>>& Y) {
  std::vector<std::vector<double>> pool = X;
  pool.insert(pool.end(), Y.begin(), Y.end());
  double med = brute_median_sq_dist(pool);
  double total = 0;
  for (double mult : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    double sigma2 = std::max(med * mult, 1e-12);
    auto kernel = [&](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0;
      for (size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
      return std::exp(-s / (2 * sigma2));
    };
    double xx = 0, yy = 0, xy = 0;
    for (const auto& a : X)
      for (const auto& b : X) xx += kernel(a, b);
    for (const auto& a : Y)
      for (const auto& b : Y) yy += kernel(a, b);
    for (const auto& a : X)
      for (const auto& b : Y) xy += kernel(a, b);
    double n = double(X.size()), m = double(Y.size());
    total += xx / (n * n) - 2 * xy / (n * m) + yy / (m * m);
  }
  return total;
}

Outcome mmd_oracle_check() {
  Rng rng(1002);
  double worst = 0, min_value = 1e300;
  for (int trial = 0; trial < 200; ++trial) {
    long n = 1 + long(rng.below(64)), m = 1 + long(rng.below(64)), dim = 1 + long(rng.below(40));
    std::vector<std::vector<double>> X, Y;
    X.assign(size_t(n), std::vector<double>(size_t(dim), 0.0));
    Y.assign(size_t(m), std::vector<double>(size_t(dim), 0.0));
    Eigen::MatrixXd Xe(n, dim), Ye(m, dim);
    for (long i = 0; i < n; ++i)
      for (long c = 0; c < dim; ++c) Xe(i, c) = X[size_t(i)][size_t(c)] = 1.5 * rng.normal();
    for (long i = 0; i < m; ++i)
      for (long c = 0; c < dim; ++c) Ye(i, c) = Y[size_t(i)][size_t(c)] = rng.normal() - 0.2;

    double got = mmd_biased_value(Xe, Ye, {});
    double want = brute_mmd(X, Y);
    worst = std::max(worst, std::abs(got - want));
    min_value = std::min(min_value, got);
    if (std::abs(got - want) > 1e-12)
      return {false, "trial " + std::to_string(trial) + ": |estimator - oracle| = " +
                         fmt(std::abs(got - want))};
    if (got != mmd_biased_value(Ye, Xe, {}))
      return {false, "trial " + std::to_string(trial) + ": argument swap changed the value"};
    if (got < -1e-12)
      return {false, "trial " + std::to_string(trial) + ": negative value " + fmt(got)};
  }
  return {true, "200 pairs, worst deviation " + fmt(worst) + ", min value " + fmt(min_value)};
}

// ---- 3: finite-difference solver exactness and convergence order --------

Outcome elliptic_check() {
  FineGrid grid = FineGrid::uniform(1001);
  std::vector<double> k(grid.coords.size(), 1.0), f(grid.coords.size(), 0.5);
  std::vector<double> u = solve_elliptic(k, f, grid);
  double u0 = interpolate_on_grid(u, grid, 0.0);
  if (std::abs(u0 - 2.5) > 1e-10)
    return {false, "constant-data solve: u(0) = " + fmt(u0) + ", want 2.5 within 1e-10"};

  const double pi = 3.14159265358979323846;
  auto sine_error = [&](int nodes) {
    FineGrid g = FineGrid::uniform(nodes);
    std::vector<double> kk(g.coords.size(), 1.0), ff(g.coords.size());
    for (size_t i = 0; i < g.coords.size(); ++i)
      ff[i] = pi * pi / 10.0 * std::sin(pi * g.coords[i]);
    std::vector<double> uu = solve_elliptic(kk, ff, g);
    double err = 0;
    for (size_t i = 0; i < g.coords.size(); ++i)
      err = std::max(err, std::abs(uu[i] - std::sin(pi * g.coords[i])));
    return err;
  };
  double ratio = sine_error(501) / sine_error(1001);
  if (ratio < 3.5 || ratio > 4.5)
    return {false, "halving h scaled the error by " + fmt(ratio) + ", want [3.5, 4.5]"};
  return {true, "u(0) error " + fmt(std::abs(u0 - 2.5)) + ", refinement ratio " + fmt(ratio)};
}

// ---- 4: sorted-sample transport distance vs exhaustive matching ---------

Outcome transport_oracle_check() {
  Rng rng(1004);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 1 + rng.below(10);
    std::vector<double> a(n), b(n);
    for (double& v : a) v = 2 * rng.normal();
    for (double& v : b) v = 2 * rng.normal();

    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), size_t(0));
    double best = 1e300;
    do {
      double sum = 0;
      for (size_t i = 0; i < n; ++i) sum += std::abs(a[i] - b[perm[i]]);
      best = std::min(best, sum / double(n));
    } while (std::next_permutation(perm.begin(), perm.end()));

    double got = wasserstein_1d(a, b);
    worst = std::max(worst, std::abs(got - best));
    if (std::abs(got - best) > 1e-12)
      return {false, "trial " + std::to_string(trial) + " (n=" + std::to_string(n) +
                         "): |sorted - matched| = " + fmt(std::abs(got - best))};
  }
  return {true, "100 set pairs up to 10 points, worst deviation " + fmt(worst)};
}

// ---- 5: Gaussian process sampler statistics ------------------------------

Outcome gp_statistics_check() {
  GaussKernelSpec spec{0.0, 4.0 / 25.0, 1.0};
  std::vector<double> coords = {-0.8, -0.3, 0.0, 0.2, 0.7};
  int count = 100000;
  Eigen::MatrixXd paths = sample_gp(spec, coords, count, 505);

  Eigen::VectorXd mean = paths.colwise().mean().transpose();
  Eigen::MatrixXd centered = paths.rowwise() - mean.transpose();
  double worst_var = 0;
  for (long c = 0; c < paths.cols(); ++c) {
    double var = centered.col(c).squaredNorm() / double(count - 1);
    double rel = std::abs(var - 0.16) / 0.16;
    worst_var = std::max(worst_var, rel);
    if (rel > 0.05)
      return {false, "variance at x=" + fmt(coords[size_t(c)]) + " off by " + fmt(rel)};
  }
  // coords[2] = 0.0 and coords[3] = 0.2: lag-0.2 covariance
  double cov = centered.col(2).dot(centered.col(3)) / double(count - 1);
  double want = spec.covariance(0.0, 0.2);
  double rel = std::abs(cov - want) / want;
  if (rel > 0.05) return {false, "lag-0.2 covariance off by " + fmt(rel)};
  return {true, "1e5 paths: worst variance deviation " + fmt(worst_var) +
                    ", lag-0.2 covariance deviation " + fmt(rel)};
}

// ---- shared desk-run plumbing --------------------------------------------

SnapshotSet reference_set(const ExperimentPreset& preset, int points, int count, uint64_t seed) {
  ProblemSpec problem = preset.problem;
  std::vector<double> grid = uniform_sensors(points);
  if (problem.mode == ProblemMode::Process) {
    problem.layout = {{}, {}, grid, {}};
  } else {
    problem.mode = ProblemMode::Mixed;
    problem.layout = {grid, grid, {0.0}, {}};
  }
  return build_dataset(problem, preset.k_hat, preset.f, count, seed, count);
}

StepObserver progress_printer(int64_t epochs) {
  int64_t every = std::max<int64_t>(1, epochs / 10);
  return [epochs, every](int64_t epoch, int64_t batch, StepPhase phase, const TrainedNets&) {
    if (phase == StepPhase::GeneratorUpdated && batch == 0 && epoch % every == 0) {
      std::fprintf(stderr, "    ... epoch %lld/%lld\n", (long long)epoch, (long long)epochs);
      std::fflush(stderr);
    }
  };
}

// ---- 6: process approximation desk run ----------------------------------

Outcome process_desk_run() {
  const ExperimentPreset& base = *find_preset("sp-l1");
  TrainConfig config = base.config;
  config.epochs = 2000;
  config.batch_size = 250;
  config.seed = 1;

  SnapshotSet data = build_dataset(base.problem, base.k_hat, base.f, 500, 61, 1000);
  TrainResult result = train_process(data, config, progress_printer(config.epochs));

  SnapshotSet reference = reference_set(base, 101, 1000, 6161);
  EvalConfig eval;
  eval.test_points = 101;
  eval.test_samples = 1000;
  eval.checkpoint_count = 1;  // pools samples from the final model only
  eval.checkpoint_window = config.checkpoint_cadence;
  eval.seed = 7;
  MetricsReport report = evaluate_generator(result.store, eval, reference);

  size_t records = report.wasserstein_curve.size();
  size_t tail = std::max<size_t>(1, records / 10);
  double w_first = 0, w_last = 0;
  for (size_t i = 0; i < tail; ++i) {
    w_first += report.wasserstein_curve[i];
    w_last += report.wasserstein_curve[records - 1 - i];
  }
  w_first /= double(tail);
  w_last /= double(tail);

  std::string detail = "W1 first-decile mean " + fmt(w_first) + ", last-decile mean " +
                       fmt(w_last) + " (ratio " + fmt(w_last / w_first) + ", bar 0.30)";
  bool pass = w_last < 0.30 * w_first;
  for (int i = 0; i < 3; ++i) {
    double gen = report.eigenvalues_generated[size_t(i)];
    double ref = report.eigenvalues_reference[size_t(i)];
    double rel = std::abs(gen - ref) / ref;
    detail += "; ev" + std::to_string(i + 1) + " rel " + fmt(rel);
    pass = pass && rel <= 0.25;
  }
  detail += " (bar 0.25)";
  return {pass, detail};
}

// ---- 7: forward-problem desk run -----------------------------------------

Outcome forward_desk_run() {
  const ExperimentPreset& base = *find_preset("forward");
  TrainConfig config = base.config;
  config.epochs = 4000;
  config.seed = 2;

  SnapshotSet data = build_dataset(base.problem, base.k_hat, base.f, base.train_count, 71, 1000);
  TrainResult result = train_sde(data, base.problem, config, progress_printer(config.epochs));

  SnapshotSet reference = reference_set(base, 101, 1000, 7171);
  EvalConfig eval;
  eval.test_points = 101;
  eval.test_samples = 1000;
  eval.checkpoint_count = 30;
  eval.checkpoint_window = 3000;
  eval.seed = 8;
  MetricsReport report = evaluate_generator(result.store, eval, reference);

  double mean_err = report.agg_mean_u.mean;
  std::string detail = "rel error over " + std::to_string(report.selected_epochs.size()) +
                       " checkpoints: u-mean curve " + fmt(mean_err) + ", u-std curve " +
                       fmt(report.agg_std_u.mean);

  // trend: the trailing five selected checkpoints against the five nearest
  // the quarter-of-training mark
  size_t k = std::min<size_t>(5, report.rel_err_mean_u.size());
  double early = 0, late = 0;
  for (size_t i = 0; i < k; ++i) {
    early += report.rel_err_mean_u[i];
    late += report.rel_err_mean_u[report.rel_err_mean_u.size() - 1 - i];
  }
  early /= double(k);
  late /= double(k);
  detail += "; early-window " + fmt(early) + " vs final-window " + fmt(late);

  if (!(mean_err < 0.10)) return {false, detail + ": mean error must be below 0.10"};
  if (!(late < early)) return {false, detail + ": final window must improve on the early window"};
  return {true, detail};
}

// ---- 8: checkpoint selection protocol exactness --------------------------

Outcome protocol_check() {
  CheckpointStore store;
  for (int64_t e = 100; e <= 10000; e += 100) store.records.push_back({e, {}});
  CheckpointSelection sel = checkpoint_select(store, 30, 3000);
  if (sel.short_history) return {false, "full history flagged short"};
  std::vector<int64_t> got;
  for (size_t i : sel.indices) got.push_back(store.records[i].epoch);
  std::vector<int64_t> want;
  for (int64_t e = 7100; e <= 10000; e += 100) want.push_back(e);
  if (got != want) {
    std::string detail = "selected";
    for (int64_t e : got) detail += " " + std::to_string(e);
    return {false, detail};
  }
  return {true, "10000-epoch store selects exactly epochs 7100..10000 step 100"};
}

// ---- 9: bitwise determinism of training ----------------------------------

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome determinism_check() {
  const ExperimentPreset& base = *find_preset("forward");
  TrainConfig config = base.config;
  config.epochs = 4;
  config.batch_size = 8;
  config.hidden_layers = 2;
  config.hidden_width = 16;
  config.checkpoint_cadence = 2;
  config.seed = 9;

  SnapshotSet data = build_dataset(base.problem, base.k_hat, base.f, 16, 91, 16);

  std::filesystem::path root =
      std::filesystem::temp_directory_path() / "stochlat-acceptance-determinism";
  std::filesystem::remove_all(root);
  for (const char* leaf : {"a", "b"}) {
    TrainResult result = train_sde(data, base.problem, config);
    save_run(root / leaf, result);
  }

  int compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(root / "a")) {
    std::filesystem::path name = entry.path().filename();
    if (name.string().rfind("checkpoint-", 0) != 0) continue;
    ++compared;
    if (file_bytes(entry.path()) != file_bytes(root / "b" / name)) {
      std::filesystem::remove_all(root);
      return {false, name.string() + " differs between identical runs"};
    }
  }
  std::filesystem::remove_all(root);
  if (compared == 0) return {false, "no checkpoint files found"};
  return {true, std::to_string(compared) + " checkpoint files bitwise identical across reruns"};
}

// ---- 10: preset fidelity table -------------------------------------------

Outcome preset_table_check() {
  struct Row {
    const char* name;
    size_t n_k, n_u, n_f, n_b;
    int train_count, batch, noise_dim;
    int64_t epochs;
    int layers, width;
  };
  const Row rows[] = {
      {"sp-l1", 0, 0, 6, 0, 1000, 500, 4, 5000, 3, 64},
      {"sp-l0.5", 0, 0, 6, 0, 1000, 500, 4, 5000, 3, 64},
      {"sp-l0.2", 0, 0, 6, 0, 1000, 500, 4, 5000, 3, 64},
      {"forward", 13, 0, 21, 2, 1000, 500, 4, 10000, 4, 128},
      {"forward-m2", 13, 0, 21, 2, 1000, 500, 2, 10000, 4, 128},
      {"forward-m20", 13, 0, 21, 2, 1000, 500, 20, 10000, 4, 128},
      {"forward-n300", 13, 0, 21, 2, 300, 300, 4, 10000, 4, 128},
      {"forward-n2000", 13, 0, 21, 2, 2000, 1000, 4, 10000, 4, 128},
      {"forward-n5000", 13, 0, 21, 2, 5000, 1000, 4, 10000, 4, 128},
      {"inverse", 1, 13, 21, 0, 1000, 500, 4, 10000, 4, 128},
      {"mixed-a", 15, 9, 21, 0, 1000, 500, 4, 10000, 4, 128},
      {"mixed-b", 9, 15, 21, 0, 1000, 500, 4, 10000, 4, 128},
      {"highdim-a008", 13, 0, 21, 2, 5000, 1000, 10, 10000, 4, 128},
      {"highdim-a002", 13, 0, 41, 2, 5000, 1000, 20, 10000, 4, 128},
  };
  if (experiment_presets().size() != std::size(rows))
    return {false, "expected " + std::to_string(std::size(rows)) + " presets"};
  for (const Row& row : rows) {
    const ExperimentPreset* p = find_preset(row.name);
    if (!p) return {false, std::string("missing preset ") + row.name};
    const SensorLayout& l = p->problem.layout;
    bool ok = l.n_k() == row.n_k && l.n_u() == row.n_u && l.n_f() == row.n_f &&
              l.n_b() == row.n_b && p->train_count == row.train_count &&
              p->config.batch_size == row.batch && p->config.noise_dim == row.noise_dim &&
              p->config.epochs == row.epochs && p->config.hidden_layers == row.layers &&
              p->config.hidden_width == row.width;
    if (!ok) return {false, std::string(row.name) + " deviates from the published settings"};
  }
  const ExperimentPreset& hd = *find_preset("highdim-a008");
  if (std::abs(hd.f.width - 0.0064) > 1e-15) return {false, "highdim-a008 kernel width"};
  const ExperimentPreset& sp = *find_preset("sp-l0.5");
  if (std::abs(sp.f.width - 0.5) > 1e-15) return {false, "sp-l0.5 kernel width"};
  return {true, std::to_string(std::size(rows)) + " presets match the published settings"};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "jet parameter gradients vs central differences", jet_gradient_check},
      {2, "kernel distance vs brute-force oracle", mmd_oracle_check},
      {3, "elliptic solver exactness and order", elliptic_check},
      {4, "1D transport distance vs exhaustive matching", transport_oracle_check},
      {5, "GP sampler moments", gp_statistics_check},
      {6, "process approximation desk run", process_desk_run},
      {7, "forward problem desk run", forward_desk_run},
      {8, "checkpoint selection protocol", protocol_check},
      {9, "training determinism", determinism_check},
      {10, "preset fidelity table", preset_table_check},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) selected.push_back(std::atoi(item.c_str()));
    } else {
      std::fprintf(stderr, "usage: %s [--only 1,2,...]\n", argv[0]);
      return 2;
    }
  }

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d. %s (%.1fs): %s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
