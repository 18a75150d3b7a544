#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "stochlat/mlp.hpp"
#include "stochlat/sensors.hpp"

namespace stochlat {

// Batched network evaluation over rows of inputs. This is the trainer's
// fast route; the scalar graph remains the reference implementation and
// the two are cross-checked against each other in the test suite.
//
// All backward passes accumulate (+=) into caller-zeroed flat gradients.

struct DenseTrace {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> hidden;  // post-tanh activations per hidden layer
};

Eigen::MatrixXd dense_forward(const MlpParams& params, const Eigen::MatrixXd& input,
                              DenseTrace* trace = nullptr);

// d_input, when given, receives the adjoint of the input rows (the hook that
// lets generator gradients flow through the encoder's input).
void dense_backward(const MlpParams& params, const DenseTrace& trace,
                    const Eigen::MatrixXd& d_output, std::span<double> grad_flat,
                    Eigen::MatrixXd* d_input = nullptr);

// Order-2 derivative channels along the first input column. Each input row
// is [x, aux...]; value/d1/d2 hold the outputs and their first and second
// x-derivatives row by row. d2 stays empty unless requested.
struct JetChannels {
  Eigen::MatrixXd value, d1, d2;
};

struct JetTrace {
  bool with_d2 = false;
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> t, zd, zs;  // per hidden layer: tanh of the value
                                           // pre-activation, d1/d2 pre-activations
};

JetChannels jet_forward(const MlpParams& params, const Eigen::MatrixXd& input, bool with_d2,
                        JetTrace* trace = nullptr);

// Channel adjoints may be passed empty when a channel does not feed the
// objective. d_d2 must be empty unless the trace was built with_d2.
// d_input_value, when given, receives the adjoint of the input rows (the
// coordinate column and the aux columns; the derivative-channel seeds are
// constants and contribute nothing extra).
void jet_backward(const MlpParams& params, const JetTrace& trace, const Eigen::MatrixXd& d_value,
                  const Eigen::MatrixXd& d_d1, const Eigen::MatrixXd& d_d2,
                  std::span<double> grad_flat, Eigen::MatrixXd* d_input_value = nullptr);

// Row r = i * coords.size() + j holds [coords[j], latents.row(i)...]: every
// latent visits every coordinate in one stacked batch.
Eigen::MatrixXd stacked_inputs(std::span<const double> coords, const Eigen::MatrixXd& latents);

// Scalar net sampled at every coordinate per latent: out(i, j) = net value at
// (coords[j], latents.row(i)). The field route for process approximation.
Eigen::MatrixXd value_batch(const MlpParams& net, std::span<const double> coords,
                            const Eigen::MatrixXd& latents, DenseTrace* trace = nullptr);

void value_batch_backward(const MlpParams& net, const DenseTrace& trace,
                          const Eigen::MatrixXd& d_values, std::span<double> grad_flat,
                          Eigen::MatrixXd* d_latents = nullptr);

// Synthetic snapshots for a whole latent batch, one row per latent, blocks
// in K | U | F | B order. K, U, B are plain values; F combines the jet
// channels of both nets into -(1/10)(k' u' + k u'').
struct SyntheticBatchTrace {
  long count = 0;
  DenseTrace k_vals, u_vals, b_vals;
  JetTrace k_jet, u_jet;
  Eigen::MatrixXd k_value, k_d1, u_d1, u_d2;  // jet outputs at the stacked f rows
};

Eigen::MatrixXd synthetic_batch(const MlpParams& k_net, const MlpParams& u_net,
                                const SensorLayout& layout, const Eigen::MatrixXd& latents,
                                SyntheticBatchTrace* trace = nullptr);

// Empty gradient spans skip the corresponding accumulation (passthrough).
// d_latents, when given, receives the adjoint of the latent rows, which is
// how reconstruction error reaches the encoder.
void synthetic_batch_backward(const MlpParams& k_net, const MlpParams& u_net,
                              const SensorLayout& layout, const SyntheticBatchTrace& trace,
                              const Eigen::MatrixXd& d_snapshots, std::span<double> grad_k,
                              std::span<double> grad_u, Eigen::MatrixXd* d_latents = nullptr);

}  // namespace stochlat
