#include "stochlat/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stochlat {

void MmdConfig::validate() const {
  const std::vector<double>& list =
      mode == BandwidthMode::MedianHeuristic ? multipliers : fixed_sigma2;
  if (list.empty()) throw std::runtime_error("mmd: empty bandwidth list");
  for (double v : list)
    if (!(v > 0.0)) throw std::runtime_error("mmd: bandwidths must be positive");
  if (!(floor > 0.0)) throw std::runtime_error("mmd: bandwidth floor must be positive");
}

namespace {

Eigen::MatrixXd sqdist(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::VectorXd a2 = A.rowwise().squaredNorm();
  Eigen::VectorXd b2 = B.rowwise().squaredNorm();
  Eigen::MatrixXd D = -2.0 * A * B.transpose();
  D.colwise() += a2;
  D.rowwise() += b2.transpose();
  return D.cwiseMax(0.0);
}

double median_of(std::vector<double>& v) {
  size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
  return 0.5 * (v[mid - 1] + hi);
}

std::vector<double> bandwidths_from_distances(const Eigen::MatrixXd& Dxx,
                                              const Eigen::MatrixXd& Dxy,
                                              const Eigen::MatrixXd& Dyy,
                                              const MmdConfig& config) {
  config.validate();
  if (config.mode == MmdConfig::BandwidthMode::FixedList) {
    std::vector<double> out = config.fixed_sigma2;
    for (double& s : out) s = std::max(s, config.floor);
    return out;
  }
  std::vector<double> dists;
  dists.reserve(size_t(Dxx.rows()) * (Dxx.rows() - 1) / 2 +
                size_t(Dyy.rows()) * (Dyy.rows() - 1) / 2 + size_t(Dxy.size()));
  for (int i = 0; i < Dxx.rows(); ++i)
    for (int j = i + 1; j < Dxx.cols(); ++j) dists.push_back(Dxx(i, j));
  for (int i = 0; i < Dyy.rows(); ++i)
    for (int j = i + 1; j < Dyy.cols(); ++j) dists.push_back(Dyy(i, j));
  for (int i = 0; i < Dxy.rows(); ++i)
    for (int j = 0; j < Dxy.cols(); ++j) dists.push_back(Dxy(i, j));
  double med = dists.empty() ? config.floor : median_of(dists);
  med = std::max(med, config.floor);
  std::vector<double> out;
  out.reserve(config.multipliers.size());
  for (double m : config.multipliers) out.push_back(std::max(med * m, config.floor));
  return out;
}

void check_pair(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() == 0 || Y.rows() == 0) throw std::runtime_error("mmd: empty sample set");
  if (X.cols() != Y.cols()) throw std::runtime_error("mmd: sample dimension mismatch");
}

// The estimator is symmetric in (X, Y); evaluating both orders through one
// canonical internal order makes that symmetry bit-exact instead of
// up-to-rounding.
bool canonical_order_swaps(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() != Y.rows()) return X.rows() > Y.rows();
  for (int i = 0; i < X.rows(); ++i)
    for (int j = 0; j < X.cols(); ++j)
      if (X(i, j) != Y(i, j)) return X(i, j) > Y(i, j);
  return false;
}

Eigen::MatrixXd to_matrix(const SampleNodes& S, const Graph& g) {
  if (S.empty()) throw std::runtime_error("mmd: empty sample set");
  Eigen::MatrixXd M(S.size(), S[0].size());
  for (size_t i = 0; i < S.size(); ++i) {
    if (S[i].size() != S[0].size()) throw std::runtime_error("mmd: ragged sample set");
    for (size_t j = 0; j < S[i].size(); ++j) M(i, j) = g.value(S[i][j]);
  }
  return M;
}

// Squared-distance node between two sample vectors: affine of squared
// coordinate differences (each pair (d, d) contributes d^2).
NodeId sqdist_node(Graph& g, const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::vector<std::pair<NodeId, NodeId>> terms;
  terms.reserve(a.size());
  for (size_t d = 0; d < a.size(); ++d) {
    NodeId diff = g.sub(a[d], b[d]);
    terms.push_back({diff, diff});
  }
  return g.affine(terms, 0.0);
}

}  // namespace

std::vector<double> resolve_bandwidths(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                       const MmdConfig& config) {
  check_pair(X, Y);
  if (config.mode == MmdConfig::BandwidthMode::FixedList) {
    config.validate();
    std::vector<double> out = config.fixed_sigma2;
    for (double& s : out) s = std::max(s, config.floor);
    return out;
  }
  return bandwidths_from_distances(sqdist(X, X), sqdist(X, Y), sqdist(Y, Y), config);
}

NodeId mmd_biased(Graph& g, const SampleNodes& X_in, const SampleNodes& Y_in,
                  const MmdConfig& config) {
  Eigen::MatrixXd xv = to_matrix(X_in, g), yv = to_matrix(Y_in, g);
  check_pair(xv, yv);
  const bool swap = canonical_order_swaps(xv, yv);
  const SampleNodes& X = swap ? Y_in : X_in;
  const SampleNodes& Y = swap ? X_in : Y_in;
  std::vector<double> sigma2 =
      swap ? resolve_bandwidths(yv, xv, config) : resolve_bandwidths(xv, yv, config);
  const size_t n = X.size(), m = Y.size();

  std::vector<NodeId> scale(sigma2.size());
  for (size_t b = 0; b < sigma2.size(); ++b) scale[b] = g.constant(-0.5 / sigma2[b]);
  NodeId c_xx = g.constant(2.0 / double(n * n));
  NodeId c_yy = g.constant(2.0 / double(m * m));
  NodeId c_xy = g.constant(-2.0 / double(n * m));

  std::vector<std::pair<NodeId, NodeId>> terms;
  terms.reserve(sigma2.size() * (n * (n - 1) / 2 + m * (m - 1) / 2 + n * m));
  auto add_block = [&](const SampleNodes& A, const SampleNodes& B, NodeId coeff, bool upper) {
    for (size_t i = 0; i < A.size(); ++i) {
      for (size_t j = upper ? i + 1 : 0; j < B.size(); ++j) {
        NodeId d2 = sqdist_node(g, A[i], B[j]);
        for (size_t b = 0; b < sigma2.size(); ++b)
          terms.push_back({coeff, g.exp(g.mul(scale[b], d2))});
      }
    }
  };
  add_block(X, X, c_xx, true);
  add_block(Y, Y, c_yy, true);
  add_block(X, Y, c_xy, false);
  // Diagonal kernel values are exactly 1 per bandwidth: fold into the offset.
  double offset = double(sigma2.size()) * (1.0 / double(n) + 1.0 / double(m));
  return g.affine(terms, offset);
}

NodeId pair_mmd_mean(Graph& g, const SampleNodes& X_hat, const SampleNodes& X,
                     const MmdConfig& config) {
  if (X_hat.size() != X.size() || X.empty())
    throw std::runtime_error("pair_mmd_mean: sample counts must match and be nonzero");
  std::vector<double> sigma2 = resolve_bandwidths(to_matrix(X_hat, g), to_matrix(X, g), config);
  const size_t n = X.size();
  NodeId coeff = g.constant(-2.0 / double(n));
  std::vector<std::pair<NodeId, NodeId>> terms;
  terms.reserve(n * sigma2.size());
  std::vector<NodeId> scale(sigma2.size());
  for (size_t b = 0; b < sigma2.size(); ++b) scale[b] = g.constant(-0.5 / sigma2[b]);
  for (size_t j = 0; j < n; ++j) {
    NodeId d2 = sqdist_node(g, X_hat[j], X[j]);
    for (size_t b = 0; b < sigma2.size(); ++b)
      terms.push_back({coeff, g.exp(g.mul(scale[b], d2))});
  }
  return g.affine(terms, 2.0 * double(sigma2.size()));
}

double mmd_biased_value(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                        const MmdConfig& config) {
  return mmd_biased_value_grad(X, Y, config, nullptr, nullptr);
}

double mmd_biased_value_grad(const Eigen::MatrixXd& X_in, const Eigen::MatrixXd& Y_in,
                             const MmdConfig& config, Eigen::MatrixXd* dX_in,
                             Eigen::MatrixXd* dY_in) {
  check_pair(X_in, Y_in);
  const bool swap = canonical_order_swaps(X_in, Y_in);
  const Eigen::MatrixXd& X = swap ? Y_in : X_in;
  const Eigen::MatrixXd& Y = swap ? X_in : Y_in;
  Eigen::MatrixXd* dX = swap ? dY_in : dX_in;
  Eigen::MatrixXd* dY = swap ? dX_in : dY_in;
  const double n = double(X.rows()), m = double(Y.rows());
  Eigen::MatrixXd Dxx = sqdist(X, X), Dxy = sqdist(X, Y), Dyy = sqdist(Y, Y);
  std::vector<double> sigma2 = bandwidths_from_distances(Dxx, Dxy, Dyy, config);

  double value = 0.0;
  Eigen::MatrixXd Wxx, Wxy, Wyy;  // sum over bandwidths of K / sigma^2
  if (dX || dY) {
    Wxx.setZero(Dxx.rows(), Dxx.cols());
    Wxy.setZero(Dxy.rows(), Dxy.cols());
    Wyy.setZero(Dyy.rows(), Dyy.cols());
  }
  for (double s2 : sigma2) {
    Eigen::ArrayXXd Kxx = (-Dxx.array() / (2.0 * s2)).exp();
    Eigen::ArrayXXd Kxy = (-Dxy.array() / (2.0 * s2)).exp();
    Eigen::ArrayXXd Kyy = (-Dyy.array() / (2.0 * s2)).exp();
    value += Kxx.sum() / (n * n) - 2.0 * Kxy.sum() / (n * m) + Kyy.sum() / (m * m);
    if (dX || dY) {
      Wxx += (Kxx / s2).matrix();
      Wxy += (Kxy / s2).matrix();
      Wyy += (Kyy / s2).matrix();
    }
  }
  if (dX) {
    Eigen::VectorXd rs_xx = Wxx.rowwise().sum();
    Eigen::VectorXd rs_xy = Wxy.rowwise().sum();
    *dX = (2.0 / (n * m)) * (rs_xy.asDiagonal() * X - Wxy * Y) -
          (2.0 / (n * n)) * (rs_xx.asDiagonal() * X - Wxx * X);
  }
  if (dY) {
    Eigen::VectorXd rs_yy = Wyy.rowwise().sum();
    Eigen::VectorXd cs_xy = Wxy.colwise().sum();
    *dY = (2.0 / (n * m)) * (cs_xy.asDiagonal() * Y - Wxy.transpose() * X) -
          (2.0 / (m * m)) * (rs_yy.asDiagonal() * Y - Wyy * Y);
  }
  return value;
}

double pair_mmd_mean_value_grad(const Eigen::MatrixXd& X_hat, const Eigen::MatrixXd& X,
                                const MmdConfig& config, Eigen::MatrixXd* dX_hat) {
  check_pair(X_hat, X);
  if (X_hat.rows() != X.rows()) throw std::runtime_error("pair_mmd_mean: sample count mismatch");
  std::vector<double> sigma2 = resolve_bandwidths(X_hat, X, config);
  const double n = double(X.rows());
  Eigen::VectorXd d2 = (X_hat - X).rowwise().squaredNorm();
  double value = 0.0;
  if (dX_hat) dX_hat->setZero(X.rows(), X.cols());
  for (double s2 : sigma2) {
    Eigen::ArrayXd K = (-d2.array() / (2.0 * s2)).exp();
    value += (2.0 / n) * (1.0 - K).sum();
    if (dX_hat) *dX_hat += ((2.0 / (n * s2)) * K).matrix().asDiagonal() * (X_hat - X);
  }
  return value;
}

}  // namespace stochlat
