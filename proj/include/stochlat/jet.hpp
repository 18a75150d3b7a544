#pragma once

#include <span>
#include <utility>

#include "stochlat/graph.hpp"

namespace stochlat {

// Value plus first and second derivative with respect to one scalar
// coordinate, all living as graph nodes. Propagating jets forward while the
// graph stays differentiable in reverse is what lets a physics residual
// containing u'' still yield exact parameter gradients.
struct SpatialJet {
  NodeId value, d1, d2;
};

// Jet with zero derivatives: parameters, latent inputs, anything that does
// not vary with the coordinate. Derivative slots alias the shared zero node,
// so downstream propagation skips their terms entirely.
SpatialJet jet_from_node(Graph& g, NodeId v);
SpatialJet jet_constant(Graph& g, double v);

// The coordinate itself: d1 = 1, d2 = 0.
SpatialJet jet_coordinate(Graph& g, NodeId x);

SpatialJet jet_add(Graph& g, SpatialJet a, SpatialJet b);
SpatialJet jet_sub(Graph& g, SpatialJet a, SpatialJet b);
SpatialJet jet_mul(Graph& g, SpatialJet a, SpatialJet b);
SpatialJet jet_neg(Graph& g, SpatialJet a);
SpatialJet jet_affine(Graph& g, std::span<const std::pair<SpatialJet, SpatialJet>> products,
                      double offset);
SpatialJet jet_tanh(Graph& g, SpatialJet a);
SpatialJet jet_exp(Graph& g, SpatialJet a);
SpatialJet jet_square(Graph& g, SpatialJet a);
SpatialJet jet_sqrt(Graph& g, SpatialJet a);
SpatialJet jet_reciprocal(Graph& g, SpatialJet a);

// Uniform entry point keyed by primitive kind. Affine interprets the inputs
// as consecutive (a, b) pairs with offset 0. Constant/Leaf are not
// propagatable and raise an error.
SpatialJet jet_propagate(Graph& g, OpKind op, std::span<const SpatialJet> inputs);

}  // namespace stochlat
