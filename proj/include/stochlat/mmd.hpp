#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stochlat/graph.hpp"

namespace stochlat {

// Gaussian-kernel MMD configuration. The estimator sums the biased
// V-statistic over a list of squared bandwidths sigma^2, either absolute
// (fixed-list) or derived from the data: median pairwise squared distance
// of the pooled batch times each multiplier. Bandwidths are always treated
// as constants (never differentiated), and both computation routes resolve
// them identically so their values agree.
struct MmdConfig {
  enum class BandwidthMode { MedianHeuristic, FixedList };
  BandwidthMode mode = BandwidthMode::MedianHeuristic;
  std::vector<double> multipliers = {0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> fixed_sigma2;  // used in FixedList mode
  double floor = 1e-12;              // minimum squared bandwidth

  void validate() const;
};

// Distribution-level terms compare whole batches; per-sample preserves the
// literal per-index reading (singleton-vs-singleton kernel distances).
enum class MmdGranularity { Batch, PerSample };

using SampleNodes = std::vector<std::vector<NodeId>>;  // samples x dim

// Squared bandwidth list for a given pooled sample pair. Median convention:
// sort all pairwise squared distances of the pooled set (i < j), average
// the two middle elements when the count is even, floor the result.
std::vector<double> resolve_bandwidths(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                       const MmdConfig& config);

// Biased V-statistic (1/n^2) sum k(x_i, x_j) - (2/nm) sum k(x_i, y_j)
// + (1/m^2) sum k(y_i, y_j), summed over bandwidths, as one graph node
// differentiable w.r.t. every input sample node.
NodeId mmd_biased(Graph& g, const SampleNodes& X, const SampleNodes& Y, const MmdConfig& config);

// Mean over pairs of the singleton MMD between X_hat[j] and X[j]:
// (1/n) sum_j sum_bw 2(1 - k(xhat_j, x_j)). Bandwidths are pooled over the
// whole pair batch; a per-pair median would always equal the pair's own
// distance and make the term a constant.
NodeId pair_mmd_mean(Graph& g, const SampleNodes& X_hat, const SampleNodes& X,
                     const MmdConfig& config);

// ---- Dense fast route (same math on Eigen matrices, rows = samples) ----

double mmd_biased_value(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                        const MmdConfig& config);

// Value plus gradients with respect to the sample entries; pass nullptr to
// skip a side. Gradients are overwritten, not accumulated.
double mmd_biased_value_grad(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                             const MmdConfig& config, Eigen::MatrixXd* dX, Eigen::MatrixXd* dY);

double pair_mmd_mean_value_grad(const Eigen::MatrixXd& X_hat, const Eigen::MatrixXd& X,
                                const MmdConfig& config, Eigen::MatrixXd* dX_hat);

}  // namespace stochlat
