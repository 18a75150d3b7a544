#include "stochlat/physics.hpp"

#include <stdexcept>

namespace stochlat {

NodeId elliptic_residual(Graph& g, const SpatialJet& k_jet, const SpatialJet& u_jet) {
  std::vector<std::pair<NodeId, NodeId>> terms;
  if (!g.is_zero(k_jet.d1) && !g.is_zero(u_jet.d1)) terms.push_back({k_jet.d1, u_jet.d1});
  if (!g.is_zero(k_jet.value) && !g.is_zero(u_jet.d2)) terms.push_back({k_jet.value, u_jet.d2});
  if (terms.empty()) return g.zero();
  return g.mul(g.constant(-0.1), g.affine(terms, 0.0));
}

std::vector<NodeId> SnapshotGraph::concat() const {
  std::vector<NodeId> out;
  out.reserve(k.size() + u.size() + f.size() + b.size());
  for (const auto* block : {&k, &u, &f, &b}) out.insert(out.end(), block->begin(), block->end());
  return out;
}

SnapshotGraph synthetic_snapshot(Graph& g, const MlpGraph& gen_k, const MlpGraph& gen_u,
                                 const SensorLayout& layout, std::span<const NodeId> latent) {
  const int want = static_cast<int>(latent.size()) + 1;
  if (gen_k.config.input_dim != want || gen_u.config.input_dim != want)
    throw std::runtime_error("synthetic_snapshot: network input dim does not match latent size");
  if (gen_k.config.output_dim != 1 || gen_u.config.output_dim != 1)
    throw std::runtime_error("synthetic_snapshot: generators must be scalar-valued");

  auto values_at = [&](const MlpGraph& net, const std::vector<double>& coords) {
    std::vector<NodeId> out;
    out.reserve(coords.size());
    std::vector<NodeId> input(1 + latent.size());
    std::copy(latent.begin(), latent.end(), input.begin() + 1);
    for (double x : coords) {
      input[0] = g.constant(x);
      out.push_back(mlp_graph_forward(g, net, input)[0]);
    }
    return out;
  };

  SnapshotGraph snap;
  snap.k = values_at(gen_k, layout.coords_k);
  snap.u = values_at(gen_u, layout.coords_u);
  snap.f.reserve(layout.coords_f.size());
  for (double x : layout.coords_f) {
    NodeId xn = g.constant(x);
    SpatialJet kj = mlp_spatial_jet(g, gen_k, xn, latent);
    SpatialJet uj = mlp_spatial_jet(g, gen_u, xn, latent);
    snap.f.push_back(elliptic_residual(g, kj, uj));
  }
  snap.b = values_at(gen_u, layout.coords_b);
  return snap;
}

}  // namespace stochlat
