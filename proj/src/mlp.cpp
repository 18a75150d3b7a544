#include "stochlat/mlp.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "stochlat/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes little-endian doubles");

namespace stochlat {

void MlpConfig::validate() const {
  if (input_dim < 1 || output_dim < 1 || hidden_layers < 0 ||
      (hidden_layers > 0 && hidden_width < 1))
    throw std::runtime_error("invalid network config");
}

size_t MlpConfig::flat_size() const {
  size_t n = 0;
  for (int l = 0; l < layer_count(); ++l) n += size_t(fan_out(l)) * fan_in(l) + fan_out(l);
  return n;
}

size_t MlpParams::weight_offset(int layer) const {
  size_t off = 0;
  for (int l = 0; l < layer; ++l)
    off += size_t(config.fan_out(l)) * config.fan_in(l) + config.fan_out(l);
  return off;
}

MlpParams init_mlp(const MlpConfig& config, uint64_t seed) {
  config.validate();
  MlpParams p{config, std::vector<double>(config.flat_size(), 0.0)};
  Rng rng(seed);
  for (int l = 0; l < config.layer_count(); ++l) {
    double bound = std::sqrt(6.0 / (config.fan_in(l) + config.fan_out(l)));
    size_t w0 = p.weight_offset(l);
    size_t nw = size_t(config.fan_out(l)) * config.fan_in(l);
    for (size_t i = 0; i < nw; ++i) p.flat[w0 + i] = (2.0 * rng.uniform() - 1.0) * bound;
    // biases stay zero
  }
  return p;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input) {
  const MlpConfig& c = params.config;
  if (static_cast<int>(input.size()) != c.input_dim)
    throw std::runtime_error("mlp_forward: input length " + std::to_string(input.size()) +
                             ", expected " + std::to_string(c.input_dim));
  std::vector<double> cur(input.begin(), input.end()), next;
  for (int l = 0; l < c.layer_count(); ++l) {
    next.assign(c.fan_out(l), 0.0);
    for (int i = 0; i < c.fan_out(l); ++i) {
      // Same accumulation order as the graph path: products first, bias last.
      double acc = 0.0;
      for (int j = 0; j < c.fan_in(l); ++j) acc += params.weight(l, i, j) * cur[j];
      acc += params.bias(l, i);
      next[i] = l < c.hidden_layers ? std::tanh(acc) : acc;
    }
    cur.swap(next);
  }
  return cur;
}

MlpGraph instantiate_mlp(Graph& g, const MlpParams& params) {
  MlpGraph net{params.config, {}};
  net.leaves.reserve(params.flat.size());
  for (double v : params.flat) net.leaves.push_back(g.leaf(v));
  return net;
}

std::vector<NodeId> mlp_graph_forward(Graph& g, const MlpGraph& net,
                                      std::span<const NodeId> inputs) {
  const MlpConfig& c = net.config;
  if (static_cast<int>(inputs.size()) != c.input_dim)
    throw std::runtime_error("mlp_graph_forward: input length mismatch");
  MlpParams shape{c, {}};  // offsets only
  std::vector<NodeId> cur(inputs.begin(), inputs.end()), next;
  for (int l = 0; l < c.layer_count(); ++l) {
    next.clear();
    size_t w0 = shape.weight_offset(l), b0 = shape.bias_offset(l);
    for (int i = 0; i < c.fan_out(l); ++i) {
      std::vector<std::pair<NodeId, NodeId>> terms;
      terms.reserve(c.fan_in(l) + 1);
      for (int j = 0; j < c.fan_in(l); ++j)
        terms.push_back({net.leaves[w0 + size_t(i) * c.fan_in(l) + j], cur[j]});
      terms.push_back({net.leaves[b0 + i], g.one()});
      NodeId z = g.affine(terms, 0.0);
      next.push_back(l < c.hidden_layers ? g.tanh(z) : z);
    }
    cur.swap(next);
  }
  return cur;
}

SpatialJet mlp_spatial_jet(Graph& g, const MlpGraph& net, NodeId x,
                           std::span<const NodeId> aux) {
  const MlpConfig& c = net.config;
  if (c.output_dim != 1)
    throw std::runtime_error("mlp_spatial_jet: network output must be scalar");
  if (static_cast<int>(aux.size()) + 1 != c.input_dim)
    throw std::runtime_error("mlp_spatial_jet: input length mismatch");
  MlpParams shape{c, {}};
  std::vector<SpatialJet> cur, next;
  cur.push_back(jet_coordinate(g, x));
  for (NodeId a : aux) cur.push_back(jet_from_node(g, a));
  SpatialJet one = jet_from_node(g, g.one());
  for (int l = 0; l < c.layer_count(); ++l) {
    next.clear();
    size_t w0 = shape.weight_offset(l), b0 = shape.bias_offset(l);
    for (int i = 0; i < c.fan_out(l); ++i) {
      std::vector<std::pair<SpatialJet, SpatialJet>> terms;
      terms.reserve(c.fan_in(l) + 1);
      for (int j = 0; j < c.fan_in(l); ++j)
        terms.push_back({jet_from_node(g, net.leaves[w0 + size_t(i) * c.fan_in(l) + j]), cur[j]});
      terms.push_back({jet_from_node(g, net.leaves[b0 + i]), one});
      SpatialJet z = jet_affine(g, terms, 0.0);
      next.push_back(l < c.hidden_layers ? jet_tanh(g, z) : z);
    }
    cur.swap(next);
  }
  return cur[0];
}

void save_mlp(std::ostream& out, const MlpParams& params, uint64_t seed, int64_t epoch) {
  const MlpConfig& c = params.config;
  out << "stochlat-net v1\n"
      << "input_dim: " << c.input_dim << "\n"
      << "output_dim: " << c.output_dim << "\n"
      << "hidden_layers: " << c.hidden_layers << "\n"
      << "hidden_width: " << c.hidden_width << "\n"
      << "seed: " << seed << "\n"
      << "epoch: " << epoch << "\n"
      << "params: " << params.flat.size() << "\n";
  out.write(reinterpret_cast<const char*>(params.flat.data()),
            static_cast<std::streamsize>(params.flat.size() * sizeof(double)));
  if (!out) throw std::runtime_error("save_mlp: write failed");
}

namespace {

std::string expect_key(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_mlp: truncated header");
  if (line.rfind(key + ": ", 0) != 0)
    throw std::runtime_error("load_mlp: expected '" + key + "', got '" + line + "'");
  return line.substr(key.size() + 2);
}

}  // namespace

MlpCheckpoint load_mlp(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != "stochlat-net v1")
    throw std::runtime_error("load_mlp: bad magic '" + magic + "'");
  MlpCheckpoint cp;
  MlpConfig& c = cp.params.config;
  c.input_dim = std::stoi(expect_key(in, "input_dim"));
  c.output_dim = std::stoi(expect_key(in, "output_dim"));
  c.hidden_layers = std::stoi(expect_key(in, "hidden_layers"));
  c.hidden_width = std::stoi(expect_key(in, "hidden_width"));
  cp.seed = std::stoull(expect_key(in, "seed"));
  cp.epoch = std::stoll(expect_key(in, "epoch"));
  size_t count = std::stoull(expect_key(in, "params"));
  c.validate();
  if (count != c.flat_size())
    throw std::runtime_error("load_mlp: parameter count does not match config");
  cp.params.flat.resize(count);
  in.read(reinterpret_cast<char*>(cp.params.flat.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
    throw std::runtime_error("load_mlp: truncated parameter block");
  return cp;
}

}  // namespace stochlat
