#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stochlat {

// Node kinds of the expression graph. The primitive set is fixed; higher
// layers (networks, physics residuals, kernel objectives) compose these and
// nothing else, so the differentiation rules live in exactly one place.
enum class OpKind : uint8_t {
  Constant,
  Leaf,
  Add,
  Sub,
  Mul,
  Neg,
  Affine,  // sum of pairwise products plus a constant offset
  Tanh,
  Exp,
  Square,
  Sqrt,
  Reciprocal,
};

const char* op_name(OpKind k);

struct NodeId {
  uint32_t index = 0;
  friend bool operator==(NodeId a, NodeId b) { return a.index == b.index; }
};

using GradientVector = std::vector<double>;

// Append-only scalar expression graph with eager value evaluation.
//
// Nodes are stored in construction order, which is therefore a topological
// order: every node's inputs have smaller indices. Values are computed when
// a node is appended and cached; set_leaf() + refresh() re-evaluates the
// whole graph in index order (used by finite-difference probes).
//
// Any non-finite value produced during evaluation or differentiation raises
// std::runtime_error naming the node kind and index, so an exploding
// objective points at the operation that overflowed instead of surfacing as
// a NaN much later.
class Graph {
 public:
  Graph();

  // Canonical shared constants, present in every graph. Jet propagation
  // tests against these to skip structurally-zero derivative terms.
  NodeId zero() const { return NodeId{0}; }
  NodeId one() const { return NodeId{1}; }
  bool is_zero(NodeId n) const { return n.index == 0; }

  NodeId constant(double v);
  NodeId leaf(double v);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId neg(NodeId a);
  NodeId affine(std::span<const std::pair<NodeId, NodeId>> products, double offset);
  NodeId tanh(NodeId a);
  NodeId exp(NodeId a);
  NodeId square(NodeId a);
  NodeId sqrt(NodeId a);
  NodeId reciprocal(NodeId a);

  double value(NodeId n) const { return values_[n.index]; }
  OpKind kind(NodeId n) const { return ops_[n.index]; }
  size_t size() const { return ops_.size(); }

  // Overwrite a Leaf node's value. Takes effect for already-built nodes only
  // after refresh().
  void set_leaf(NodeId n, double v);

  // Recompute every cached value in index order.
  void refresh();

  // Reverse-mode sweep from root. Returns one entry per requested leaf, in
  // order; leaves the root does not depend on get an exact 0.0.
  GradientVector gradient(NodeId root, std::span<const NodeId> leaves) const;

 private:
  struct Term {
    uint32_t begin, end;  // range in product_terms_
  };

  NodeId append(OpKind op, uint32_t a, uint32_t b, double value);
  double eval(uint32_t i) const;
  void check_finite(uint32_t i, double v, const char* phase) const;
  [[noreturn]] static void fail_nonfinite(uint32_t i, OpKind k, const char* phase);

  std::vector<OpKind> ops_;
  std::vector<uint32_t> in_a_;
  std::vector<uint32_t> in_b_;  // Affine: [in_a_, in_b_) indexes product_terms_
  std::vector<double> values_;
  std::vector<double> offsets_;  // Affine offsets and Constant/Leaf payloads
  std::vector<std::pair<uint32_t, uint32_t>> product_terms_;
};

}  // namespace stochlat
