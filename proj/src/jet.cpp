#include "stochlat/jet.hpp"

#include <stdexcept>
#include <vector>

namespace stochlat {

namespace {

// Zero-aware combinators. They keep jets of derivative-free inputs from
// growing the graph: a zero slot stays the shared zero node.

NodeId nz_add(Graph& g, NodeId a, NodeId b) {
  if (g.is_zero(a)) return b;
  if (g.is_zero(b)) return a;
  return g.add(a, b);
}

NodeId nz_sub(Graph& g, NodeId a, NodeId b) {
  if (g.is_zero(b)) return a;
  if (g.is_zero(a)) return g.neg(b);
  return g.sub(a, b);
}

NodeId nz_mul(Graph& g, NodeId a, NodeId b) {
  if (g.is_zero(a) || g.is_zero(b)) return g.zero();
  return g.mul(a, b);
}

NodeId nz_neg(Graph& g, NodeId a) { return g.is_zero(a) ? a : g.neg(a); }

// Affine over only the non-zero products; collapses to the zero node when
// nothing survives. Duplicated pairs encode integer coefficients (a term
// listed twice contributes 2ab), which keeps e.g. the Leibniz cross term a
// single node.
NodeId nz_affine(Graph& g, std::span<const std::pair<NodeId, NodeId>> products, double offset) {
  std::vector<std::pair<NodeId, NodeId>> kept;
  kept.reserve(products.size());
  for (auto [p, q] : products)
    if (!g.is_zero(p) && !g.is_zero(q)) kept.emplace_back(p, q);
  if (kept.empty() && offset == 0.0) return g.zero();
  return g.affine(kept, offset);
}

}  // namespace

SpatialJet jet_from_node(Graph& g, NodeId v) { return {v, g.zero(), g.zero()}; }

SpatialJet jet_constant(Graph& g, double v) { return {g.constant(v), g.zero(), g.zero()}; }

SpatialJet jet_coordinate(Graph& g, NodeId x) { return {x, g.one(), g.zero()}; }

SpatialJet jet_add(Graph& g, SpatialJet a, SpatialJet b) {
  return {g.add(a.value, b.value), nz_add(g, a.d1, b.d1), nz_add(g, a.d2, b.d2)};
}

SpatialJet jet_sub(Graph& g, SpatialJet a, SpatialJet b) {
  return {g.sub(a.value, b.value), nz_sub(g, a.d1, b.d1), nz_sub(g, a.d2, b.d2)};
}

SpatialJet jet_mul(Graph& g, SpatialJet a, SpatialJet b) {
  NodeId v = g.mul(a.value, b.value);
  std::pair<NodeId, NodeId> t1[] = {{a.d1, b.value}, {a.value, b.d1}};
  // Leibniz: (ab)'' = a''b + 2a'b' + ab''
  std::pair<NodeId, NodeId> t2[] = {{a.d2, b.value}, {a.d1, b.d1}, {a.d1, b.d1}, {a.value, b.d2}};
  return {v, nz_affine(g, t1, 0.0), nz_affine(g, t2, 0.0)};
}

SpatialJet jet_neg(Graph& g, SpatialJet a) {
  return {g.neg(a.value), nz_neg(g, a.d1), nz_neg(g, a.d2)};
}

SpatialJet jet_affine(Graph& g, std::span<const std::pair<SpatialJet, SpatialJet>> products,
                      double offset) {
  std::vector<std::pair<NodeId, NodeId>> tv, t1, t2;
  tv.reserve(products.size());
  for (const auto& [a, b] : products) {
    tv.emplace_back(a.value, b.value);
    t1.emplace_back(a.d1, b.value);
    t1.emplace_back(a.value, b.d1);
    t2.emplace_back(a.d2, b.value);
    t2.emplace_back(a.d1, b.d1);
    t2.emplace_back(a.d1, b.d1);
    t2.emplace_back(a.value, b.d2);
  }
  return {g.affine(tv, offset), nz_affine(g, t1, 0.0), nz_affine(g, t2, 0.0)};
}

SpatialJet jet_tanh(Graph& g, SpatialJet a) {
  NodeId t = g.tanh(a.value);
  if (g.is_zero(a.d1) && g.is_zero(a.d2)) return {t, g.zero(), g.zero()};
  NodeId p = g.sub(g.one(), g.square(t));  // sech^2
  NodeId d1 = nz_mul(g, p, a.d1);
  // (tanh a)'' = p a'' - 2 t p (a')^2
  NodeId lin = nz_mul(g, p, a.d2);
  NodeId curv = nz_mul(g, g.mul(t, p), g.is_zero(a.d1) ? g.zero() : g.square(a.d1));
  return {t, d1, nz_sub(g, lin, nz_add(g, curv, curv))};
}

SpatialJet jet_exp(Graph& g, SpatialJet a) {
  NodeId e = g.exp(a.value);
  if (g.is_zero(a.d1) && g.is_zero(a.d2)) return {e, g.zero(), g.zero()};
  NodeId d1 = nz_mul(g, e, a.d1);
  NodeId sq = g.is_zero(a.d1) ? g.zero() : g.square(a.d1);
  return {e, d1, nz_mul(g, e, nz_add(g, a.d2, sq))};
}

SpatialJet jet_square(Graph& g, SpatialJet a) {
  NodeId v = g.square(a.value);
  std::pair<NodeId, NodeId> t1[] = {{a.value, a.d1}, {a.value, a.d1}};
  std::pair<NodeId, NodeId> t2[] = {{a.d1, a.d1}, {a.d1, a.d1}, {a.value, a.d2}, {a.value, a.d2}};
  return {v, nz_affine(g, t1, 0.0), nz_affine(g, t2, 0.0)};
}

SpatialJet jet_sqrt(Graph& g, SpatialJet a) {
  NodeId s = g.sqrt(a.value);
  if (g.is_zero(a.d1) && g.is_zero(a.d2)) return {s, g.zero(), g.zero()};
  NodeId half = g.reciprocal(g.add(s, s));  // 1/(2 sqrt a)
  NodeId d1 = nz_mul(g, a.d1, half);
  // a''/(2s) - (a')^2/(4 s^3); the second term is d1^2 / s
  NodeId lin = nz_mul(g, a.d2, half);
  NodeId curv = g.is_zero(d1) ? g.zero() : g.mul(g.square(d1), g.reciprocal(s));
  return {s, d1, nz_sub(g, lin, curv)};
}

SpatialJet jet_reciprocal(Graph& g, SpatialJet a) {
  NodeId r = g.reciprocal(a.value);
  if (g.is_zero(a.d1) && g.is_zero(a.d2)) return {r, g.zero(), g.zero()};
  NodeId r2 = g.square(r);
  NodeId d1 = g.is_zero(a.d1) ? g.zero() : g.neg(g.mul(a.d1, r2));
  // 2 (a')^2 r^3 - a'' r^2
  NodeId curv = g.is_zero(a.d1) ? g.zero() : g.mul(g.square(a.d1), g.mul(r2, r));
  NodeId lin = nz_mul(g, a.d2, r2);
  return {r, d1, nz_sub(g, nz_add(g, curv, curv), lin)};
}

SpatialJet jet_propagate(Graph& g, OpKind op, std::span<const SpatialJet> inputs) {
  auto need = [&](size_t n) {
    if (inputs.size() != n)
      throw std::runtime_error(std::string("jet_propagate: ") + op_name(op) + " expects " +
                               std::to_string(n) + " inputs, got " + std::to_string(inputs.size()));
  };
  switch (op) {
    case OpKind::Add: need(2); return jet_add(g, inputs[0], inputs[1]);
    case OpKind::Sub: need(2); return jet_sub(g, inputs[0], inputs[1]);
    case OpKind::Mul: need(2); return jet_mul(g, inputs[0], inputs[1]);
    case OpKind::Neg: need(1); return jet_neg(g, inputs[0]);
    case OpKind::Affine: {
      if (inputs.size() % 2 != 0)
        throw std::runtime_error("jet_propagate: affine expects an even number of inputs");
      std::vector<std::pair<SpatialJet, SpatialJet>> pairs;
      for (size_t i = 0; i < inputs.size(); i += 2) pairs.emplace_back(inputs[i], inputs[i + 1]);
      return jet_affine(g, pairs, 0.0);
    }
    case OpKind::Tanh: need(1); return jet_tanh(g, inputs[0]);
    case OpKind::Exp: need(1); return jet_exp(g, inputs[0]);
    case OpKind::Square: need(1); return jet_square(g, inputs[0]);
    case OpKind::Sqrt: need(1); return jet_sqrt(g, inputs[0]);
    case OpKind::Reciprocal: need(1); return jet_reciprocal(g, inputs[0]);
    case OpKind::Constant:
    case OpKind::Leaf:
      throw std::runtime_error(std::string("jet_propagate: primitive '") + op_name(op) +
                               "' is not propagatable");
  }
  throw std::runtime_error("jet_propagate: unknown primitive");
}

}  // namespace stochlat
