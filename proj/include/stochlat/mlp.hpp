#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "stochlat/graph.hpp"
#include "stochlat/jet.hpp"

namespace stochlat {

// Fully-connected tanh network shape. hidden_layers may be 0 (a single
// affine map); the output layer is always affine.
struct MlpConfig {
  int input_dim = 1;
  int output_dim = 1;
  int hidden_layers = 1;
  int hidden_width = 1;

  int layer_count() const { return hidden_layers + 1; }
  int fan_in(int layer) const { return layer == 0 ? input_dim : hidden_width; }
  int fan_out(int layer) const { return layer == hidden_layers ? output_dim : hidden_width; }
  size_t flat_size() const;
  void validate() const;
  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

// Flat parameter store: for each layer, a row-major (fan_out x fan_in)
// weight matrix followed by fan_out biases.
struct MlpParams {
  MlpConfig config;
  std::vector<double> flat;

  size_t weight_offset(int layer) const;
  size_t bias_offset(int layer) const { return weight_offset(layer) + size_t(config.fan_out(layer)) * config.fan_in(layer); }
  double weight(int layer, int row, int col) const { return flat[weight_offset(layer) + size_t(row) * config.fan_in(layer) + col]; }
  double bias(int layer, int row) const { return flat[bias_offset(layer) + row]; }
};

// Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
MlpParams init_mlp(const MlpConfig& config, uint64_t seed);

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input);

// Graph-side instantiation: one leaf per flat parameter, same index order.
struct MlpGraph {
  MlpConfig config;
  std::vector<NodeId> leaves;
};

MlpGraph instantiate_mlp(Graph& g, const MlpParams& params);

std::vector<NodeId> mlp_graph_forward(Graph& g, const MlpGraph& net,
                                      std::span<const NodeId> inputs);

// Jet of a scalar-output network with respect to the coordinate x; aux
// carries the remaining (derivative-free) inputs, so input_dim must equal
// 1 + aux.size(). Input order is [x, aux...].
SpatialJet mlp_spatial_jet(Graph& g, const MlpGraph& net, NodeId x,
                           std::span<const NodeId> aux);

// Checkpoint serialization: text header, then the flat array as raw
// little-endian 64-bit floats. Round-trips bitwise.
struct MlpCheckpoint {
  MlpParams params;
  uint64_t seed = 0;
  int64_t epoch = 0;
};

void save_mlp(std::ostream& out, const MlpParams& params, uint64_t seed, int64_t epoch);
MlpCheckpoint load_mlp(std::istream& in);

}  // namespace stochlat
