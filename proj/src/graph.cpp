#include "stochlat/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace stochlat {

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::Constant: return "constant";
    case OpKind::Leaf: return "leaf";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Neg: return "neg";
    case OpKind::Affine: return "affine";
    case OpKind::Tanh: return "tanh";
    case OpKind::Exp: return "exp";
    case OpKind::Square: return "square";
    case OpKind::Sqrt: return "sqrt";
    case OpKind::Reciprocal: return "reciprocal";
  }
  return "?";
}

Graph::Graph() {
  append(OpKind::Constant, 0, 0, 0.0);
  append(OpKind::Constant, 0, 0, 1.0);
  offsets_[0] = 0.0;
  offsets_[1] = 1.0;
}

NodeId Graph::append(OpKind op, uint32_t a, uint32_t b, double value) {
  uint32_t i = static_cast<uint32_t>(values_.size());
  // Validate before committing: a rejected node must leave the graph intact.
  if (!std::isfinite(value)) fail_nonfinite(i, op, "evaluating");
  ops_.push_back(op);
  in_a_.push_back(a);
  in_b_.push_back(b);
  offsets_.push_back(0.0);
  values_.push_back(value);
  return NodeId{i};
}

void Graph::fail_nonfinite(uint32_t i, OpKind k, const char* phase) {
  throw std::runtime_error(std::string("non-finite value while ") + phase + " node #" +
                           std::to_string(i) + " (" + op_name(k) + ")");
}

void Graph::check_finite(uint32_t i, double v, const char* phase) const {
  if (!std::isfinite(v)) fail_nonfinite(i, ops_[i], phase);
}

NodeId Graph::constant(double v) {
  NodeId n = append(OpKind::Constant, 0, 0, v);
  offsets_[n.index] = v;
  return n;
}

NodeId Graph::leaf(double v) {
  NodeId n = append(OpKind::Leaf, 0, 0, v);
  offsets_[n.index] = v;
  return n;
}

NodeId Graph::add(NodeId a, NodeId b) {
  return append(OpKind::Add, a.index, b.index, values_[a.index] + values_[b.index]);
}

NodeId Graph::sub(NodeId a, NodeId b) {
  return append(OpKind::Sub, a.index, b.index, values_[a.index] - values_[b.index]);
}

NodeId Graph::mul(NodeId a, NodeId b) {
  return append(OpKind::Mul, a.index, b.index, values_[a.index] * values_[b.index]);
}

NodeId Graph::neg(NodeId a) {
  return append(OpKind::Neg, a.index, 0, -values_[a.index]);
}

NodeId Graph::affine(std::span<const std::pair<NodeId, NodeId>> products, double offset) {
  uint32_t begin = static_cast<uint32_t>(product_terms_.size());
  double acc = offset;
  for (auto [p, q] : products) {
    product_terms_.emplace_back(p.index, q.index);
    acc += values_[p.index] * values_[q.index];
  }
  uint32_t end = static_cast<uint32_t>(product_terms_.size());
  NodeId n = append(OpKind::Affine, begin, end, acc);
  offsets_[n.index] = offset;
  return n;
}

NodeId Graph::tanh(NodeId a) {
  return append(OpKind::Tanh, a.index, 0, std::tanh(values_[a.index]));
}

NodeId Graph::exp(NodeId a) {
  return append(OpKind::Exp, a.index, 0, std::exp(values_[a.index]));
}

NodeId Graph::square(NodeId a) {
  double v = values_[a.index];
  return append(OpKind::Square, a.index, 0, v * v);
}

NodeId Graph::sqrt(NodeId a) {
  return append(OpKind::Sqrt, a.index, 0, std::sqrt(values_[a.index]));
}

NodeId Graph::reciprocal(NodeId a) {
  return append(OpKind::Reciprocal, a.index, 0, 1.0 / values_[a.index]);
}

void Graph::set_leaf(NodeId n, double v) {
  if (ops_[n.index] != OpKind::Leaf)
    throw std::runtime_error("set_leaf on node #" + std::to_string(n.index) + " (" +
                             op_name(ops_[n.index]) + "): not a leaf");
  offsets_[n.index] = v;
  values_[n.index] = v;
}

double Graph::eval(uint32_t i) const {
  uint32_t a = in_a_[i];
  uint32_t b = in_b_[i];
  switch (ops_[i]) {
    case OpKind::Constant:
    case OpKind::Leaf: return offsets_[i];
    case OpKind::Add: return values_[a] + values_[b];
    case OpKind::Sub: return values_[a] - values_[b];
    case OpKind::Mul: return values_[a] * values_[b];
    case OpKind::Neg: return -values_[a];
    case OpKind::Affine: {
      double acc = offsets_[i];
      for (uint32_t t = a; t < b; ++t)
        acc += values_[product_terms_[t].first] * values_[product_terms_[t].second];
      return acc;
    }
    case OpKind::Tanh: return std::tanh(values_[a]);
    case OpKind::Exp: return std::exp(values_[a]);
    case OpKind::Square: return values_[a] * values_[a];
    case OpKind::Sqrt: return std::sqrt(values_[a]);
    case OpKind::Reciprocal: return 1.0 / values_[a];
  }
  return 0.0;
}

void Graph::refresh() {
  for (uint32_t i = 0; i < values_.size(); ++i) {
    double v = eval(i);
    check_finite(i, v, "evaluating");
    values_[i] = v;
  }
}

GradientVector Graph::gradient(NodeId root, std::span<const NodeId> leaves) const {
  std::vector<double> adj(root.index + 1, 0.0);
  adj[root.index] = 1.0;
  for (uint32_t i = root.index + 1; i-- > 0;) {
    double g = adj[i];
    if (g == 0.0) continue;
    check_finite(i, g, "differentiating");
    uint32_t a = in_a_[i];
    uint32_t b = in_b_[i];
    switch (ops_[i]) {
      case OpKind::Constant:
      case OpKind::Leaf: break;
      case OpKind::Add:
        adj[a] += g;
        adj[b] += g;
        break;
      case OpKind::Sub:
        adj[a] += g;
        adj[b] -= g;
        break;
      case OpKind::Mul:
        adj[a] += g * values_[b];
        adj[b] += g * values_[a];
        break;
      case OpKind::Neg:
        adj[a] -= g;
        break;
      case OpKind::Affine:
        for (uint32_t t = a; t < b; ++t) {
          auto [p, q] = product_terms_[t];
          adj[p] += g * values_[q];
          adj[q] += g * values_[p];
        }
        break;
      case OpKind::Tanh: {
        double t = values_[i];
        adj[a] += g * (1.0 - t * t);
        break;
      }
      case OpKind::Exp:
        adj[a] += g * values_[i];
        break;
      case OpKind::Square:
        adj[a] += g * 2.0 * values_[a];
        break;
      case OpKind::Sqrt:
        adj[a] += g * 0.5 / values_[i];
        break;
      case OpKind::Reciprocal:
        adj[a] -= g * values_[i] * values_[i];
        break;
    }
  }
  GradientVector out(leaves.size(), 0.0);
  for (size_t j = 0; j < leaves.size(); ++j) {
    uint32_t i = leaves[j].index;
    out[j] = i <= root.index ? adj[i] : 0.0;
    check_finite(i, out[j], "differentiating");
  }
  return out;
}

}  // namespace stochlat
