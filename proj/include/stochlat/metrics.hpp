#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "stochlat/trainer.hpp"

namespace stochlat {

struct EvalConfig {
  int test_points = 101;       // p, uniform on [-1, 1]
  int test_samples = 1000;     // generated per checkpoint
  int reference_samples = 1000;
  int checkpoint_count = 30;
  int64_t checkpoint_window = 3000;
  uint64_t seed = 0;

  void validate() const;
};

// 1D W1 distance: mean absolute difference of sorted samples (the exact
// optimal coupling in one dimension). Unequal counts are reduced by a
// seeded subsample of the larger set.
double wasserstein_1d(std::span<const double> a, std::span<const double> b, uint64_t seed = 0);

// Average of the per-coordinate 1D distances between column marginals.
double wasserstein_field(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, uint64_t seed = 0);

// Eigenvalues of the sample covariance (rows centered, 1/(N-1)), descending.
std::vector<double> pca_eigenvalues(const Eigen::MatrixXd& x);

struct MomentCurves {
  std::vector<double> mean;
  std::vector<double> std;  // 1/(N-1) normalization
};
MomentCurves moment_curves(const Eigen::MatrixXd& samples);

// ||est - ref||_2 / ||ref||_2 over the test grid.
double relative_l2(std::span<const double> estimate, std::span<const double> reference);

struct MeanStd {
  double mean = 0;
  double std = 0;
};

// In process mode the "u" entries describe the approximated process itself
// and every k entry stays empty.
struct MetricsReport {
  std::vector<double> test_grid;

  // per checkpoint record, in store order
  std::vector<int64_t> wasserstein_epochs;
  std::vector<double> wasserstein_curve;

  // over the pooled samples of the selected checkpoints
  std::vector<double> eigenvalues_generated;
  std::vector<double> eigenvalues_reference;
  std::vector<double> mean_curve_u, std_curve_u;
  std::vector<double> mean_curve_k, std_curve_k;
  std::vector<double> ref_mean_curve_u, ref_std_curve_u;
  std::vector<double> ref_mean_curve_k, ref_std_curve_k;

  // per selected checkpoint, plus mean/std across them
  std::vector<int64_t> selected_epochs;
  std::vector<double> rel_err_mean_u, rel_err_std_u;
  std::vector<double> rel_err_mean_k, rel_err_std_k;
  MeanStd agg_mean_u, agg_std_u, agg_mean_k, agg_std_k;

  bool short_history = false;
};

// Arbitrary sample source: one entry per checkpoint record. draw() returns a
// test_samples x p matrix for field 'u' (primary) or 'k'; it must be
// deterministic in (record_index, field). evaluate_generator wraps the
// checkpoint nets in one of these; tests can substitute replayed reference
// samples to calibrate the pipeline.
struct SampleSource {
  std::vector<int64_t> epochs;
  std::function<Eigen::MatrixXd(size_t record_index, char field)> draw;
  bool with_k = false;
};

MetricsReport evaluate_source(const SampleSource& source, const EvalConfig& eval,
                              std::span<const double> grid,
                              const Eigen::MatrixXd& reference_primary,
                              const Eigen::MatrixXd& reference_k);

// Checkpoint-protocol evaluation: per record, fresh latent draws seeded by
// (eval seed, epoch) feed both generator nets at all test points. The
// reference snapshot set must carry the needed blocks on the same grid:
// U and K for equation modes, F for process mode.
MetricsReport evaluate_generator(const CheckpointStore& store, const EvalConfig& eval,
                                 const SnapshotSet& reference);

// CSV tables (curves, eigenvalues, per-checkpoint errors, wasserstein curve)
// plus summary.txt.
void save_metrics(const std::filesystem::path& dir, const MetricsReport& report);

}  // namespace stochlat
