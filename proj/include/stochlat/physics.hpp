#pragma once

#include <span>
#include <vector>

#include "stochlat/mlp.hpp"
#include "stochlat/problem.hpp"

namespace stochlat {

// Residual of -(1/10) d/dx[k du/dx] = f at one point, expanded by the
// product rule: f_tilde = -(1/10) (k' u' + k u''). Differentiable w.r.t.
// both networks' parameters through the jets.
NodeId elliptic_residual(Graph& g, const SpatialJet& k_jet, const SpatialJet& u_jet);

// Snapshot assembled from generator networks at fixed latent code:
// K = k-net values, U = u-net values, F = residuals (via jets of both
// nets), B = u-net values at the boundary coordinates.
struct SnapshotGraph {
  std::vector<NodeId> k, u, f, b;

  std::vector<NodeId> concat() const;
};

SnapshotGraph synthetic_snapshot(Graph& g, const MlpGraph& gen_k, const MlpGraph& gen_u,
                                 const SensorLayout& layout, std::span<const NodeId> latent);

}  // namespace stochlat
