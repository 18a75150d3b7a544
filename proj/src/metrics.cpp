#include "stochlat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "stochlat/rng.hpp"

namespace stochlat {

namespace {

std::runtime_error fail(const std::string& what) { return std::runtime_error("metrics: " + what); }

// First `target` entries of a seeded partial Fisher-Yates pass.
std::vector<double> subsample(std::span<const double> values, size_t target, uint64_t seed) {
  std::vector<double> pool(values.begin(), values.end());
  Rng rng(seed);
  for (size_t i = 0; i < target; ++i) {
    size_t j = i + size_t(rng.below(uint64_t(pool.size() - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(target);
  return pool;
}

std::vector<double> column_of(const Eigen::MatrixXd& m, long col) {
  std::vector<double> out(size_t(m.rows()));
  for (long r = 0; r < m.rows(); ++r) out[size_t(r)] = m(r, col);
  return out;
}

MeanStd aggregate(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0;
  for (double v : values) sum += v;
  out.mean = sum / double(values.size());
  if (values.size() > 1) {
    double sq = 0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / double(values.size() - 1));
  }
  return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

void EvalConfig::validate() const {
  if (test_points < 2) throw fail("test_points must be at least 2");
  if (test_samples < 2) throw fail("test_samples must be at least 2");
  if (reference_samples < 2) throw fail("reference_samples must be at least 2");
  if (checkpoint_count < 1) throw fail("checkpoint_count must be positive");
  if (checkpoint_window < 1) throw fail("checkpoint_window must be positive");
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b, uint64_t seed) {
  if (a.empty() || b.empty()) throw fail("wasserstein over an empty sample set");
  size_t n = std::min(a.size(), b.size());
  std::vector<double> sa = a.size() > n ? subsample(a, n, seed) : std::vector<double>(a.begin(), a.end());
  std::vector<double> sb = b.size() > n ? subsample(b, n, seed) : std::vector<double>(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double sum = 0;
  for (size_t i = 0; i < n; ++i) sum += std::abs(sa[i] - sb[i]);
  return sum / double(n);
}

double wasserstein_field(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, uint64_t seed) {
  if (a.cols() != b.cols()) throw fail("wasserstein field coordinate counts differ");
  if (a.cols() == 0) throw fail("wasserstein field with no coordinates");
  if (a.rows() == 0 || b.rows() == 0) throw fail("wasserstein over an empty sample set");
  double sum = 0;
  for (long c = 0; c < a.cols(); ++c) {
    uint64_t col_seed = Rng::stream(seed, uint64_t(c)).next_bits();
    sum += wasserstein_1d(column_of(a, c), column_of(b, c), col_seed);
  }
  return sum / double(a.cols());
}

std::vector<double> pca_eigenvalues(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw fail("pca needs at least two samples");
  if (x.cols() < 1) throw fail("pca with no coordinates");
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / double(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw fail("pca eigensolver failed");
  Eigen::VectorXd ev = solver.eigenvalues();  // ascending
  std::vector<double> out(size_t(ev.size()));
  for (long i = 0; i < ev.size(); ++i) out[size_t(i)] = ev(ev.size() - 1 - i);
  return out;
}

MomentCurves moment_curves(const Eigen::MatrixXd& samples) {
  if (samples.rows() < 2) throw fail("moment curves need at least two samples");
  if (samples.cols() < 1) throw fail("moment curves with no coordinates");
  MomentCurves out;
  Eigen::VectorXd mean = samples.colwise().mean().transpose();
  Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
  Eigen::VectorXd var =
      centered.colwise().squaredNorm().transpose() / double(samples.rows() - 1);
  out.mean = to_vector(mean);
  out.std = to_vector(var.cwiseSqrt());
  return out;
}

double relative_l2(std::span<const double> estimate, std::span<const double> reference) {
  if (estimate.size() != reference.size()) throw fail("relative error size mismatch");
  if (estimate.empty()) throw fail("relative error over empty curves");
  double diff = 0, ref = 0;
  for (size_t i = 0; i < estimate.size(); ++i) {
    double d = estimate[i] - reference[i];
    diff += d * d;
    ref += reference[i] * reference[i];
  }
  if (ref == 0) throw fail("relative error against a zero reference");
  return std::sqrt(diff / ref);
}

MetricsReport evaluate_source(const SampleSource& source, const EvalConfig& eval,
                              std::span<const double> grid,
                              const Eigen::MatrixXd& reference_primary,
                              const Eigen::MatrixXd& reference_k) {
  eval.validate();
  if (source.epochs.empty()) throw fail("no checkpoint records to evaluate");
  if (!source.draw) throw fail("sample source has no draw function");
  long p = long(grid.size());
  if (p != eval.test_points) throw fail("grid size does not match test_points");
  if (reference_primary.cols() != p) throw fail("reference sample width does not match the grid");
  if (reference_primary.rows() < 2) throw fail("need at least two reference samples");
  if (source.with_k && (reference_k.cols() != p || reference_k.rows() != reference_primary.rows()))
    throw fail("reference k samples do not match the primary block");

  MetricsReport report;
  report.test_grid.assign(grid.begin(), grid.end());
  report.wasserstein_epochs = source.epochs;

  CheckpointStore skeleton;  // selection only reads the epoch list
  skeleton.records.resize(source.epochs.size());
  for (size_t i = 0; i < source.epochs.size(); ++i) skeleton.records[i].epoch = source.epochs[i];
  CheckpointSelection selection =
      checkpoint_select(skeleton, eval.checkpoint_count, eval.checkpoint_window);
  report.short_history = selection.short_history;

  std::vector<bool> selected(source.epochs.size(), false);
  for (size_t idx : selection.indices) selected[idx] = true;

  long per = eval.test_samples;
  Eigen::MatrixXd pool_u(long(selection.indices.size()) * per, p);
  Eigen::MatrixXd pool_k;
  if (source.with_k) pool_k.resize(pool_u.rows(), p);

  MomentCurves ref_u = moment_curves(reference_primary);
  MomentCurves ref_k_curves;
  if (source.with_k) ref_k_curves = moment_curves(reference_k);

  long pool_row = 0;
  for (size_t i = 0; i < source.epochs.size(); ++i) {
    Eigen::MatrixXd draw_u = source.draw(i, 'u');
    if (draw_u.rows() != per || draw_u.cols() != p)
      throw fail("sample source returned the wrong shape");
    uint64_t w_seed = Rng::stream(eval.seed, uint64_t(source.epochs[i])).next_bits();
    report.wasserstein_curve.push_back(wasserstein_field(draw_u, reference_primary, w_seed));
    if (!selected[i]) continue;

    report.selected_epochs.push_back(source.epochs[i]);
    MomentCurves mc_u = moment_curves(draw_u);
    report.rel_err_mean_u.push_back(relative_l2(mc_u.mean, ref_u.mean));
    report.rel_err_std_u.push_back(relative_l2(mc_u.std, ref_u.std));
    pool_u.middleRows(pool_row, per) = draw_u;
    if (source.with_k) {
      Eigen::MatrixXd draw_k = source.draw(i, 'k');
      if (draw_k.rows() != per || draw_k.cols() != p)
        throw fail("sample source returned the wrong shape");
      MomentCurves mc_k = moment_curves(draw_k);
      report.rel_err_mean_k.push_back(relative_l2(mc_k.mean, ref_k_curves.mean));
      report.rel_err_std_k.push_back(relative_l2(mc_k.std, ref_k_curves.std));
      pool_k.middleRows(pool_row, per) = draw_k;
    }
    pool_row += per;
  }

  MomentCurves pooled_u = moment_curves(pool_u);
  report.mean_curve_u = pooled_u.mean;
  report.std_curve_u = pooled_u.std;
  report.ref_mean_curve_u = ref_u.mean;
  report.ref_std_curve_u = ref_u.std;
  report.eigenvalues_generated = pca_eigenvalues(pool_u);
  report.eigenvalues_reference = pca_eigenvalues(reference_primary);
  if (source.with_k) {
    MomentCurves pooled_k = moment_curves(pool_k);
    report.mean_curve_k = pooled_k.mean;
    report.std_curve_k = pooled_k.std;
    report.ref_mean_curve_k = ref_k_curves.mean;
    report.ref_std_curve_k = ref_k_curves.std;
  }

  report.agg_mean_u = aggregate(report.rel_err_mean_u);
  report.agg_std_u = aggregate(report.rel_err_std_u);
  report.agg_mean_k = aggregate(report.rel_err_mean_k);
  report.agg_std_k = aggregate(report.rel_err_std_k);
  return report;
}

namespace {

Eigen::MatrixXd latent_draws(Rng rng, long rows, long cols) {
  Eigen::MatrixXd out(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) out(r, c) = rng.normal();
  return out;
}

Eigen::MatrixXd snapshot_block(const SnapshotSet& set, size_t offset, size_t width) {
  return set.matrix().middleCols(long(offset), long(width));
}

}  // namespace

MetricsReport evaluate_generator(const CheckpointStore& store, const EvalConfig& eval,
                                 const SnapshotSet& reference) {
  eval.validate();
  if (store.records.empty()) throw fail("checkpoint store is empty");
  reference.validate();

  const SensorLayout& ref_layout = reference.layout;
  bool process = store.mode == ProblemMode::Process;
  std::span<const double> grid;
  Eigen::MatrixXd ref_primary, ref_k;
  if (process) {
    if (ref_layout.n_f() == 0) throw fail("reference set lacks an F block");
    grid = ref_layout.coords_f;
    ref_primary = snapshot_block(reference, ref_layout.n_k() + ref_layout.n_u(), ref_layout.n_f());
  } else {
    if (ref_layout.n_u() == 0) throw fail("reference set lacks a U block");
    if (ref_layout.n_k() == 0) throw fail("reference set lacks a K block");
    if (ref_layout.coords_k != ref_layout.coords_u)
      throw fail("reference K and U blocks sit on different grids");
    grid = ref_layout.coords_u;
    ref_primary = snapshot_block(reference, ref_layout.n_k(), ref_layout.n_u());
    ref_k = snapshot_block(reference, 0, ref_layout.n_k());
  }
  if (long(grid.size()) != eval.test_points)
    throw fail("reference grid does not match test_points");

  int m = store.config.noise_dim;
  for (const CheckpointRecord& rec : store.records) {
    if (rec.nets.gen_u.config.input_dim != 1 + m)
      throw fail("checkpoint generator width disagrees with the stored noise_dim");
  }

  SampleSource source;
  source.with_k = !process;
  source.epochs.reserve(store.records.size());
  for (const CheckpointRecord& rec : store.records) source.epochs.push_back(rec.epoch);
  source.draw = [&store, &eval, grid, m](size_t index, char field) {
    const CheckpointRecord& rec = store.records[index];
    // Both fields of a record share one latent batch: regenerating the
    // stream per call keeps the draw stateless.
    Eigen::MatrixXd xi =
        latent_draws(Rng::stream(eval.seed, uint64_t(rec.epoch)), eval.test_samples, m);
    const MlpParams& net = field == 'k' ? rec.nets.gen_k : rec.nets.gen_u;
    return value_batch(net, grid, xi);
  };

  return evaluate_source(source, eval, grid, ref_primary, ref_k);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw fail("cannot write " + path.string());
  return out;
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns,
                 const std::vector<int64_t>* epoch_col = nullptr) {
  std::ofstream out = open_out(path);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  size_t rows = columns.empty() ? (epoch_col ? epoch_col->size() : 0) : columns[0].size();
  for (size_t r = 0; r < rows; ++r) {
    bool first = true;
    if (epoch_col) {
      out << (*epoch_col)[r];
      first = false;
    }
    for (const std::vector<double>& col : columns) {
      out << (first ? "" : ",") << fmt_g17(col[r]);
      first = false;
    }
    out << "\n";
  }
  if (!out) throw fail("failed while writing " + path.string());
}

std::string fmt_pair(const MeanStd& v) {
  return fmt_g17(v.mean) + " +/- " + fmt_g17(v.std);
}

}  // namespace

void save_metrics(const std::filesystem::path& dir, const MetricsReport& report) {
  std::filesystem::create_directories(dir);
  bool with_k = !report.mean_curve_k.empty();

  {
    std::vector<std::string> header = {"x", "mean_u", "std_u", "ref_mean_u", "ref_std_u"};
    std::vector<std::vector<double>> cols = {report.test_grid, report.mean_curve_u,
                                             report.std_curve_u, report.ref_mean_curve_u,
                                             report.ref_std_curve_u};
    if (with_k) {
      header.insert(header.end(), {"mean_k", "std_k", "ref_mean_k", "ref_std_k"});
      cols.insert(cols.end(), {report.mean_curve_k, report.std_curve_k, report.ref_mean_curve_k,
                               report.ref_std_curve_k});
    }
    write_table(dir / "curves.csv", header, cols);
  }
  {
    std::vector<double> index(report.eigenvalues_generated.size());
    for (size_t i = 0; i < index.size(); ++i) index[i] = double(i + 1);
    write_table(dir / "eigenvalues.csv", {"component", "generated", "reference"},
                {index, report.eigenvalues_generated, report.eigenvalues_reference});
  }
  write_table(dir / "wasserstein.csv", {"epoch", "w1"}, {report.wasserstein_curve},
              &report.wasserstein_epochs);
  {
    std::vector<std::string> header = {"epoch", "rel_err_mean_u", "rel_err_std_u"};
    std::vector<std::vector<double>> cols = {report.rel_err_mean_u, report.rel_err_std_u};
    if (with_k) {
      header.insert(header.end(), {"rel_err_mean_k", "rel_err_std_k"});
      cols.insert(cols.end(), {report.rel_err_mean_k, report.rel_err_std_k});
    }
    write_table(dir / "checkpoint_errors.csv", header, cols, &report.selected_epochs);
  }

  std::ofstream out = open_out(dir / "summary.txt");
  out << "checkpoints evaluated: " << report.wasserstein_epochs.size() << "\n";
  out << "checkpoints selected: " << report.selected_epochs.size()
      << (report.short_history ? " (short history)" : "") << "\n";
  if (!report.wasserstein_curve.empty())
    out << "final field W1: " << fmt_g17(report.wasserstein_curve.back()) << "\n";
  out << "rel err, mean curve of u: " << fmt_pair(report.agg_mean_u) << "\n";
  out << "rel err, std curve of u:  " << fmt_pair(report.agg_std_u) << "\n";
  if (with_k) {
    out << "rel err, mean curve of k: " << fmt_pair(report.agg_mean_k) << "\n";
    out << "rel err, std curve of k:  " << fmt_pair(report.agg_std_k) << "\n";
  }
  if (!out) throw fail("failed while writing summary.txt");
}

}  // namespace stochlat
