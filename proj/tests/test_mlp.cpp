#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "stochlat/gradcheck.hpp"
#include "stochlat/mlp.hpp"
#include "stochlat/rng.hpp"

using namespace stochlat;

TEST_CASE("flat size arithmetic") {
  MlpConfig c{5, 1, 1, 4};
  CHECK(c.flat_size() == 5 * 4 + 4 + 4 * 1 + 1);  // 29
  MlpConfig c2{2, 1, 4, 128};
  CHECK(c2.flat_size() == size_t(2 * 128 + 128) + 3 * (128 * 128 + 128) + (128 + 1));
}

TEST_CASE("init respects layer bounds, zero biases, determinism") {
  MlpConfig c{5, 1, 2, 7};
  MlpParams p = init_mlp(c, 123);
  for (int l = 0; l < c.layer_count(); ++l) {
    double bound = std::sqrt(6.0 / (c.fan_in(l) + c.fan_out(l)));
    for (int i = 0; i < c.fan_out(l); ++i) {
      for (int j = 0; j < c.fan_in(l); ++j) CHECK(std::abs(p.weight(l, i, j)) <= bound);
      CHECK(p.bias(l, i) == 0.0);
    }
  }
  MlpParams q = init_mlp(c, 123);
  CHECK(p.flat == q.flat);
  MlpParams r = init_mlp(c, 124);
  CHECK(p.flat != r.flat);
}

TEST_CASE("zero weights pass the output bias through") {
  MlpConfig c{3, 2, 2, 5};
  MlpParams p{c, std::vector<double>(c.flat_size(), 0.0)};
  p.flat[p.bias_offset(c.hidden_layers) + 0] = 1.25;
  p.flat[p.bias_offset(c.hidden_layers) + 1] = -0.5;
  auto out = mlp_forward(p, std::vector<double>{0.1, 7.0, -3.0});
  CHECK(out[0] == 1.25);
  CHECK(out[1] == -0.5);
}

TEST_CASE("no hidden layers is a plain affine map") {
  MlpConfig c{2, 1, 0, 1};
  MlpParams p{c, {2.0, -1.0, 0.5}};  // W = [2, -1], b = 0.5
  auto out = mlp_forward(p, std::vector<double>{3.0, 1.0});
  CHECK(out[0] == doctest::Approx(2.0 * 3.0 - 1.0 + 0.5));
}

TEST_CASE("forward equals graph-based evaluation bitwise") {
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    MlpConfig c{4, 3, 2, 6};
    MlpParams p = init_mlp(c, 100 + trial);
    std::vector<double> input = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    auto plain = mlp_forward(p, input);

    Graph g;
    MlpGraph net = instantiate_mlp(g, p);
    std::vector<NodeId> in_nodes;
    for (double v : input) in_nodes.push_back(g.constant(v));
    auto out_nodes = mlp_graph_forward(g, net, in_nodes);
    REQUIRE(out_nodes.size() == plain.size());
    for (size_t i = 0; i < plain.size(); ++i) CHECK(g.value(out_nodes[i]) == plain[i]);
  }
}

TEST_CASE("one-hidden-layer zero-bias net is odd") {
  MlpConfig c{2, 1, 1, 8};
  MlpParams p = init_mlp(c, 55);  // biases already zero
  std::vector<double> x = {0.37, -0.81};
  std::vector<double> nx = {-0.37, 0.81};
  auto a = mlp_forward(p, x);
  auto b = mlp_forward(p, nx);
  CHECK(a[0] == doctest::Approx(-b[0]).epsilon(1e-14));
}

TEST_CASE("affine net jet") {
  // u = w*x + c with w=1.7, c=0.3: jet (w*x+c, w, 0)
  MlpConfig c{1, 1, 0, 1};
  MlpParams p{c, {1.7, 0.3}};
  Graph g;
  MlpGraph net = instantiate_mlp(g, p);
  SpatialJet j = mlp_spatial_jet(g, net, g.constant(0.9), {});
  CHECK(g.value(j.value) == doctest::Approx(1.7 * 0.9 + 0.3));
  CHECK(g.value(j.d1) == doctest::Approx(1.7));
  CHECK(g.is_zero(j.d2));
}

TEST_CASE("zero-weight net jet is the bias with zero derivatives") {
  MlpConfig c{3, 1, 2, 4};
  MlpParams p{c, std::vector<double>(c.flat_size(), 0.0)};
  p.flat[p.bias_offset(2)] = 0.77;
  Graph g;
  MlpGraph net = instantiate_mlp(g, p);
  NodeId aux[] = {g.constant(0.5), g.constant(-0.2)};
  SpatialJet j = mlp_spatial_jet(g, net, g.constant(0.1), aux);
  CHECK(g.value(j.value) == 0.77);
  CHECK(g.value(j.d1) == 0.0);
  CHECK(g.value(j.d2) == 0.0);
}

TEST_CASE("random tanh net jets match nested finite differences") {
  MlpConfig c{3, 1, 2, 16};
  MlpParams p = init_mlp(c, 2024);
  std::vector<double> aux = {0.4, -1.2};
  auto value_at = [&](double x) {
    return mlp_forward(p, std::vector<double>{x, aux[0], aux[1]})[0];
  };
  double x0 = 0.35, h = 1e-4;
  double fd1 = (value_at(x0 + h) - value_at(x0 - h)) / (2 * h);
  double fd2 = (value_at(x0 + h) - 2 * value_at(x0) + value_at(x0 - h)) / (h * h);

  Graph g;
  MlpGraph net = instantiate_mlp(g, p);
  NodeId aux_nodes[] = {g.constant(aux[0]), g.constant(aux[1])};
  SpatialJet j = mlp_spatial_jet(g, net, g.constant(x0), aux_nodes);
  CHECK(std::abs(g.value(j.d1) - fd1) / std::max(1.0, std::abs(fd1)) < 1e-4);
  CHECK(std::abs(g.value(j.d2) - fd2) / std::max(1.0, std::abs(fd2)) < 1e-4);
}

TEST_CASE("parameter gradients through jet components check out") {
  MlpConfig c{2, 1, 1, 6};
  MlpParams p = init_mlp(c, 31);
  auto build = [&](Graph& g, std::span<const NodeId> leaves) {
    MlpGraph net{c, std::vector<NodeId>(leaves.begin(), leaves.end())};
    NodeId aux[] = {g.constant(0.6)};
    SpatialJet j = mlp_spatial_jet(g, net, g.constant(-0.3), aux);
    // loss mixing value, d1 and d2
    return g.add(g.square(j.d2), g.add(g.square(j.d1), g.square(j.value)));
  };
  auto report = check_gradient(build, p.flat, 1e-4, 1e-4);
  CHECK(report.pass);
}

TEST_CASE("checkpoint round trip is bitwise") {
  MlpConfig c{6, 1, 3, 10};
  MlpParams p = init_mlp(c, 909);
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  save_mlp(buf, p, 909, 4200);
  MlpCheckpoint cp = load_mlp(buf);
  CHECK(cp.seed == 909);
  CHECK(cp.epoch == 4200);
  CHECK(cp.params.config == c);
  REQUIRE(cp.params.flat.size() == p.flat.size());
  CHECK(cp.params.flat == p.flat);
}

TEST_CASE("input length mismatches are rejected") {
  MlpConfig c{3, 1, 1, 4};
  MlpParams p = init_mlp(c, 1);
  CHECK_THROWS(mlp_forward(p, std::vector<double>{1.0, 2.0}));
  Graph g;
  MlpGraph net = instantiate_mlp(g, p);
  NodeId aux[] = {g.constant(0.0)};
  CHECK_THROWS(mlp_spatial_jet(g, net, g.constant(0.0), aux));  // needs 2 aux
  MlpConfig c2{2, 3, 1, 4};
  MlpParams p2 = init_mlp(c2, 2);
  Graph g2;
  MlpGraph net2 = instantiate_mlp(g2, p2);
  NodeId aux2[] = {g2.constant(0.0)};
  CHECK_THROWS(mlp_spatial_jet(g2, net2, g2.constant(0.0), aux2));  // non-scalar output
}
