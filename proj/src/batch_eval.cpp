#include "stochlat/batch_eval.hpp"

#include <stdexcept>

namespace stochlat {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> weight_map(const MlpParams& p, int layer) {
  return {p.flat.data() + p.weight_offset(layer), p.config.fan_out(layer),
          p.config.fan_in(layer)};
}

Eigen::Map<const Eigen::VectorXd> bias_map(const MlpParams& p, int layer) {
  return {p.flat.data() + p.bias_offset(layer), p.config.fan_out(layer)};
}

Eigen::Map<RowMat> weight_grad_map(const MlpParams& p, std::span<double> grad, int layer) {
  return {grad.data() + p.weight_offset(layer), p.config.fan_out(layer),
          p.config.fan_in(layer)};
}

Eigen::Map<Eigen::VectorXd> bias_grad_map(const MlpParams& p, std::span<double> grad, int layer) {
  return {grad.data() + p.bias_offset(layer), p.config.fan_out(layer)};
}

void check_batch_shapes(const MlpParams& p, const Eigen::MatrixXd& input,
                        std::span<const double> grad, const char* where) {
  if (input.cols() != p.config.input_dim)
    throw std::runtime_error(std::string(where) + ": input width does not match the network");
  if (!grad.empty() && grad.size() != p.flat.size())
    throw std::runtime_error(std::string(where) + ": gradient buffer size mismatch");
}

Eigen::MatrixXd zero_or(const Eigen::MatrixXd& m, long rows, long cols, const char* where) {
  if (m.size() == 0) return Eigen::MatrixXd::Zero(rows, cols);
  if (m.rows() != rows || m.cols() != cols)
    throw std::runtime_error(std::string(where) + ": adjoint shape mismatch");
  return m;
}

}  // namespace

Eigen::MatrixXd dense_forward(const MlpParams& params, const Eigen::MatrixXd& input,
                              DenseTrace* trace) {
  check_batch_shapes(params, input, {}, "dense_forward");
  if (trace) {
    trace->input = input;
    trace->hidden.clear();
  }
  Eigen::MatrixXd a = input;
  const int layers = params.config.layer_count();
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (a * weight_map(params, l).transpose()).rowwise() +
                        bias_map(params, l).transpose();
    if (l + 1 < layers) {
      a = z.array().tanh();
      if (trace) trace->hidden.push_back(a);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

void dense_backward(const MlpParams& params, const DenseTrace& trace,
                    const Eigen::MatrixXd& d_output, std::span<double> grad_flat,
                    Eigen::MatrixXd* d_input) {
  check_batch_shapes(params, trace.input, grad_flat, "dense_backward");
  const int layers = params.config.layer_count();
  if (long(trace.hidden.size()) != layers - 1)
    throw std::runtime_error("dense_backward: trace does not match the network");
  // an empty gradient buffer means "adjoint passthrough only" (d_input is
  // still produced); the generator step uses this to flow through the
  // encoder without disturbing its gradients
  const bool want_grad = !grad_flat.empty();
  Eigen::MatrixXd dz = d_output;
  for (int l = layers - 1; l >= 0; --l) {
    const Eigen::MatrixXd& prev = (l == 0) ? trace.input : trace.hidden[size_t(l) - 1];
    if (want_grad) {
      weight_grad_map(params, grad_flat, l).noalias() += dz.transpose() * prev;
      bias_grad_map(params, grad_flat, l) += dz.colwise().sum().transpose();
    }
    if (l == 0) {
      if (d_input) d_input->noalias() = dz * weight_map(params, l);
      break;
    }
    Eigen::MatrixXd da = dz * weight_map(params, l);
    dz = da.array() * (1.0 - prev.array().square());
  }
}

JetChannels jet_forward(const MlpParams& params, const Eigen::MatrixXd& input, bool with_d2,
                        JetTrace* trace) {
  check_batch_shapes(params, input, {}, "jet_forward");
  if (trace) {
    trace->with_d2 = with_d2;
    trace->input = input;
    trace->t.clear();
    trace->zd.clear();
    trace->zs.clear();
  }
  const long rows = input.rows();
  Eigen::MatrixXd v = input;
  Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(rows, input.cols());
  d1.col(0).setOnes();
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(rows, input.cols());
  const int layers = params.config.layer_count();
  for (int l = 0; l < layers; ++l) {
    auto W = weight_map(params, l);
    Eigen::MatrixXd zv = (v * W.transpose()).rowwise() + bias_map(params, l).transpose();
    Eigen::MatrixXd zd = d1 * W.transpose();
    Eigen::MatrixXd zs;
    if (with_d2) zs = d2 * W.transpose();
    if (l + 1 == layers) {
      return {std::move(zv), std::move(zd), std::move(zs)};
    }
    Eigen::ArrayXXd t = zv.array().tanh();
    Eigen::ArrayXXd p = 1.0 - t.square();
    v = t.matrix();
    d1 = (p * zd.array()).matrix();
    if (with_d2) d2 = (p * zs.array() - 2.0 * t * p * zd.array().square()).matrix();
    if (trace) {
      trace->t.push_back(v);
      trace->zd.push_back(std::move(zd));
      if (with_d2) trace->zs.push_back(std::move(zs));
    }
  }
  return {std::move(v), std::move(d1), std::move(d2)};  // layer_count >= 1, unreachable
}

void jet_backward(const MlpParams& params, const JetTrace& trace, const Eigen::MatrixXd& d_value,
                  const Eigen::MatrixXd& d_d1, const Eigen::MatrixXd& d_d2,
                  std::span<double> grad_flat, Eigen::MatrixXd* d_input_value) {
  check_batch_shapes(params, trace.input, grad_flat, "jet_backward");
  const bool want_grad = !grad_flat.empty();
  if (!trace.with_d2 && d_d2.size() != 0)
    throw std::runtime_error("jet_backward: d2 adjoint given but trace lacks the d2 channel");
  const int layers = params.config.layer_count();
  if (long(trace.t.size()) != layers - 1)
    throw std::runtime_error("jet_backward: trace does not match the network");
  const long rows = trace.input.rows();
  const int out_dim = params.config.output_dim;
  const bool use_d2 = trace.with_d2;

  Eigen::MatrixXd av = zero_or(d_value, rows, out_dim, "jet_backward");
  Eigen::MatrixXd ad = zero_or(d_d1, rows, out_dim, "jet_backward");
  Eigen::MatrixXd as;
  if (use_d2) as = zero_or(d_d2, rows, out_dim, "jet_backward");

  for (int l = layers - 1; l >= 0; --l) {
    // channels entering this layer's affine
    Eigen::MatrixXd v_prev, d1_prev, d2_prev;
    if (l == 0) {
      v_prev = trace.input;
      d1_prev = Eigen::MatrixXd::Zero(rows, trace.input.cols());
      d1_prev.col(0).setOnes();
      if (use_d2) d2_prev = Eigen::MatrixXd::Zero(rows, trace.input.cols());
    } else {
      const Eigen::ArrayXXd t = trace.t[size_t(l) - 1].array();
      const Eigen::ArrayXXd p = 1.0 - t.square();
      const Eigen::ArrayXXd zd = trace.zd[size_t(l) - 1].array();
      v_prev = t.matrix();
      d1_prev = (p * zd).matrix();
      if (use_d2) {
        const Eigen::ArrayXXd zs = trace.zs[size_t(l) - 1].array();
        d2_prev = (p * zs - 2.0 * t * p * zd.square()).matrix();
      }
    }

    if (want_grad) {
      auto gW = weight_grad_map(params, grad_flat, l);
      gW.noalias() += av.transpose() * v_prev;
      gW.noalias() += ad.transpose() * d1_prev;
      if (use_d2) gW.noalias() += as.transpose() * d2_prev;
      bias_grad_map(params, grad_flat, l) += av.colwise().sum().transpose();
    }
    if (l == 0) {
      if (d_input_value) d_input_value->noalias() = av * weight_map(params, l);
      break;
    }

    auto W = weight_map(params, l);
    Eigen::ArrayXXd av_in = (av * W).array();
    Eigen::ArrayXXd ad_in = (ad * W).array();
    Eigen::ArrayXXd as_in;
    if (use_d2) as_in = (as * W).array();

    // through the tanh jet of layer l-1
    const Eigen::ArrayXXd t = trace.t[size_t(l) - 1].array();
    const Eigen::ArrayXXd p = 1.0 - t.square();
    const Eigen::ArrayXXd zd = trace.zd[size_t(l) - 1].array();
    if (use_d2) {
      const Eigen::ArrayXXd zs = trace.zs[size_t(l) - 1].array();
      av = (p * (av_in - 2.0 * t * zd * ad_in -
                 as_in * (2.0 * t * zs + 2.0 * zd.square() * (1.0 - 3.0 * t.square()))))
               .matrix();
      ad = (p * ad_in - 4.0 * as_in * t * p * zd).matrix();
      as = (p * as_in).matrix();
    } else {
      av = (p * (av_in - 2.0 * t * zd * ad_in)).matrix();
      ad = (p * ad_in).matrix();
    }
  }
}

Eigen::MatrixXd stacked_inputs(std::span<const double> coords, const Eigen::MatrixXd& latents) {
  const long per = long(coords.size());
  const long n = latents.rows();
  Eigen::MatrixXd rows(n * per, 1 + latents.cols());
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < per; ++j) {
      rows(i * per + j, 0) = coords[size_t(j)];
      rows.row(i * per + j).tail(latents.cols()) = latents.row(i);
    }
  return rows;
}

namespace {

// stacked column (count*per) back to a count x per block
void scatter_block(Eigen::MatrixXd& out, long col0, const Eigen::MatrixXd& stacked, long per) {
  for (long i = 0; i < out.rows(); ++i)
    for (long j = 0; j < per; ++j) out(i, col0 + j) = stacked(i * per + j, 0);
}

Eigen::MatrixXd gather_block(const Eigen::MatrixXd& d_snapshots, long col0, long per) {
  Eigen::MatrixXd stacked(d_snapshots.rows() * per, 1);
  for (long i = 0; i < d_snapshots.rows(); ++i)
    for (long j = 0; j < per; ++j) stacked(i * per + j, 0) = d_snapshots(i, col0 + j);
  return stacked;
}

// adjoint of stacked input rows, summed back onto each latent's row
void fold_latent_adjoint(const Eigen::MatrixXd& d_rows, long per, Eigen::MatrixXd& d_latents) {
  for (long i = 0; i < d_latents.rows(); ++i)
    for (long j = 0; j < per; ++j)
      d_latents.row(i) += d_rows.row(i * per + j).tail(d_latents.cols());
}

}  // namespace

Eigen::MatrixXd value_batch(const MlpParams& net, std::span<const double> coords,
                            const Eigen::MatrixXd& latents, DenseTrace* trace) {
  if (net.config.output_dim != 1)
    throw std::runtime_error("value_batch: network must be scalar-valued");
  Eigen::MatrixXd stacked = dense_forward(net, stacked_inputs(coords, latents), trace);
  Eigen::MatrixXd out(latents.rows(), long(coords.size()));
  scatter_block(out, 0, stacked, long(coords.size()));
  return out;
}

void value_batch_backward(const MlpParams& net, const DenseTrace& trace,
                          const Eigen::MatrixXd& d_values, std::span<double> grad_flat,
                          Eigen::MatrixXd* d_latents) {
  const long per = d_values.cols();
  Eigen::MatrixXd d_input;
  dense_backward(net, trace, gather_block(d_values, 0, per), grad_flat,
                 d_latents ? &d_input : nullptr);
  if (d_latents) {
    d_latents->setZero(d_values.rows(), net.config.input_dim - 1);
    fold_latent_adjoint(d_input, per, *d_latents);
  }
}

Eigen::MatrixXd synthetic_batch(const MlpParams& k_net, const MlpParams& u_net,
                                const SensorLayout& layout, const Eigen::MatrixXd& latents,
                                SyntheticBatchTrace* trace) {
  layout.validate();
  if (k_net.config.output_dim != 1 || u_net.config.output_dim != 1)
    throw std::runtime_error("synthetic_batch: generator networks must be scalar-valued");
  if (k_net.config.input_dim != 1 + latents.cols() ||
      u_net.config.input_dim != 1 + latents.cols())
    throw std::runtime_error("synthetic_batch: network input width must be 1 + latent dim");
  const long n = latents.rows();
  if (trace) trace->count = n;
  Eigen::MatrixXd out(n, long(layout.total()));
  long col = 0;
  if (!layout.coords_k.empty()) {
    Eigen::MatrixXd vals = dense_forward(k_net, stacked_inputs(layout.coords_k, latents),
                                         trace ? &trace->k_vals : nullptr);
    scatter_block(out, col, vals, long(layout.coords_k.size()));
  }
  col += long(layout.coords_k.size());
  if (!layout.coords_u.empty()) {
    Eigen::MatrixXd vals = dense_forward(u_net, stacked_inputs(layout.coords_u, latents),
                                         trace ? &trace->u_vals : nullptr);
    scatter_block(out, col, vals, long(layout.coords_u.size()));
  }
  col += long(layout.coords_u.size());
  if (!layout.coords_f.empty()) {
    Eigen::MatrixXd rows = stacked_inputs(layout.coords_f, latents);
    JetChannels k_ch = jet_forward(k_net, rows, false, trace ? &trace->k_jet : nullptr);
    JetChannels u_ch = jet_forward(u_net, rows, true, trace ? &trace->u_jet : nullptr);
    Eigen::MatrixXd f =
        (-0.1 * (k_ch.d1.array() * u_ch.d1.array() + k_ch.value.array() * u_ch.d2.array()))
            .matrix();
    if (trace) {
      trace->k_value = std::move(k_ch.value);
      trace->k_d1 = std::move(k_ch.d1);
      trace->u_d1 = std::move(u_ch.d1);
      trace->u_d2 = std::move(u_ch.d2);
    }
    scatter_block(out, col, f, long(layout.coords_f.size()));
  }
  col += long(layout.coords_f.size());
  if (!layout.coords_b.empty()) {
    Eigen::MatrixXd vals = dense_forward(u_net, stacked_inputs(layout.coords_b, latents),
                                         trace ? &trace->b_vals : nullptr);
    scatter_block(out, col, vals, long(layout.coords_b.size()));
  }
  return out;
}

void synthetic_batch_backward(const MlpParams& k_net, const MlpParams& u_net,
                              const SensorLayout& layout, const SyntheticBatchTrace& trace,
                              const Eigen::MatrixXd& d_snapshots, std::span<double> grad_k,
                              std::span<double> grad_u, Eigen::MatrixXd* d_latents) {
  if (d_snapshots.rows() != trace.count || d_snapshots.cols() != long(layout.total()))
    throw std::runtime_error("synthetic_batch_backward: adjoint shape mismatch");
  if (d_latents) d_latents->setZero(trace.count, k_net.config.input_dim - 1);
  Eigen::MatrixXd d_rows;
  Eigen::MatrixXd* rows_out = d_latents ? &d_rows : nullptr;
  long col = 0;
  if (!layout.coords_k.empty()) {
    const long per = long(layout.coords_k.size());
    dense_backward(k_net, trace.k_vals, gather_block(d_snapshots, col, per), grad_k, rows_out);
    if (d_latents) fold_latent_adjoint(d_rows, per, *d_latents);
  }
  col += long(layout.coords_k.size());
  if (!layout.coords_u.empty()) {
    const long per = long(layout.coords_u.size());
    dense_backward(u_net, trace.u_vals, gather_block(d_snapshots, col, per), grad_u, rows_out);
    if (d_latents) fold_latent_adjoint(d_rows, per, *d_latents);
  }
  col += long(layout.coords_u.size());
  if (!layout.coords_f.empty()) {
    const long per = long(layout.coords_f.size());
    Eigen::ArrayXXd df = gather_block(d_snapshots, col, per).array() * -0.1;
    Eigen::MatrixXd a_k_value = (df * trace.u_d2.array()).matrix();
    Eigen::MatrixXd a_k_d1 = (df * trace.u_d1.array()).matrix();
    Eigen::MatrixXd a_u_d1 = (df * trace.k_d1.array()).matrix();
    Eigen::MatrixXd a_u_d2 = (df * trace.k_value.array()).matrix();
    jet_backward(k_net, trace.k_jet, a_k_value, a_k_d1, {}, grad_k, rows_out);
    if (d_latents) fold_latent_adjoint(d_rows, per, *d_latents);
    jet_backward(u_net, trace.u_jet, {}, a_u_d1, a_u_d2, grad_u, rows_out);
    if (d_latents) fold_latent_adjoint(d_rows, per, *d_latents);
  }
  col += long(layout.coords_f.size());
  if (!layout.coords_b.empty()) {
    const long per = long(layout.coords_b.size());
    dense_backward(u_net, trace.b_vals, gather_block(d_snapshots, col, per), grad_u, rows_out);
    if (d_latents) fold_latent_adjoint(d_rows, per, *d_latents);
  }
}

}  // namespace stochlat
