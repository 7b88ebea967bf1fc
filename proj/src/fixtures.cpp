#include "bnet/fixtures.hpp"

#include <algorithm>

#include "bnet/rng.hpp"

namespace bnet {
namespace fixtures {

Dag toy_network() {
  Dag dag;

  Node x1;
  x1.id = "x1";
  x1.dist = Categorical{{0.5, 0.5}, {}, false};
  dag.nodes.push_back(std::move(x1));

  Node x2;
  x2.id = "x2";
  x2.dist = Categorical{{0.3, 0.4, 0.3}, {}, false};
  dag.nodes.push_back(std::move(x2));

  Node x3;
  x3.id = "x3";
  x3.dist = Categorical{{0.55, 0.3, 0.15}, {}, false};
  dag.nodes.push_back(std::move(x3));

  Node m1;
  m1.id = "m1";
  m1.kind = NodeKind::Model;
  m1.parents = {"x1", "x2"};
  m1.model = ModelSpec{LinearSoftmax{},
                       3,
                       {{"x1", Encoding::Numeric, 0}, {"x2", Encoding::Numeric, 0}}};
  dag.nodes.push_back(std::move(m1));

  Node m2;
  m2.id = "m2";
  m2.kind = NodeKind::Model;
  m2.parents = {"x2", "x3"};
  m2.model = ModelSpec{LinearSoftmax{},
                       2,
                       {{"x2", Encoding::Numeric, 0}, {"x3", Encoding::Numeric, 0}}};
  dag.nodes.push_back(std::move(m2));

  Node y;
  y.id = "y";
  y.kind = NodeKind::Model;
  y.parents = {"m1", "m2"};
  y.model = ModelSpec{LinearSoftmax{},
                      2,
                      {{"m1", Encoding::OneHot, 3}, {"m2", Encoding::OneHot, 2}}};
  dag.nodes.push_back(std::move(y));

  dag.output_node = "y";
  return dag;
}

namespace {

DataTable toy_rows(std::size_t n, std::uint64_t seed, bool nonlinear_m2) {
  Rng rng(mix64(seed ^ 0x70faull));
  DataTable table;
  table.n_rows = n;
  auto& cx1 = table.columns["x1"];
  auto& cx2 = table.columns["x2"];
  auto& cx3 = table.columns["x3"];
  auto& cm1 = table.columns["m1"];
  auto& cm2 = table.columns["m2"];
  auto& cy = table.columns["y"];

  const std::vector<double> px1 = {0.5, 0.5};
  const std::vector<double> px2 = {0.3, 0.4, 0.3};
  const std::vector<double> px3 = {0.55, 0.3, 0.15};

  for (std::size_t i = 0; i < n; ++i) {
    int x1 = rng.categorical(px1);
    int x2 = rng.categorical(px2);
    int x3 = rng.categorical(px3);

    // Ordinal risk-style label; the 10% noise keeps the classes overlapping.
    int m1 = std::min(x1 + x2, 2);
    if (rng.uniform() < 0.10) m1 = static_cast<int>(rng.uniform() * 3.0);

    // Default rule is monotone in x3 so a linear fit stays well specified;
    // the nonlinear variant marks only the middle category positive, which a
    // monotone-in-x3 linear model cannot carve out but depth-1 stumps can.
    int m2 = nonlinear_m2 ? (x3 == 1 ? 1 : 0) : (x3 >= 1 ? 1 : 0);
    if (rng.uniform() < 0.07) m2 = 1 - m2;

    double p_y = m2 == 1 ? 0.95 : (m1 == 2 ? 0.08 : 0.03);
    int y = rng.uniform() < p_y ? 1 : 0;

    cx1.push_back(x1);
    cx2.push_back(x2);
    cx3.push_back(x3);
    cm1.push_back(m1);
    cm2.push_back(m2);
    cy.push_back(y);
  }
  return table;
}

}  // namespace

DataTable toy_data(std::size_t n, std::uint64_t seed) {
  return toy_rows(n, seed, false);
}

DataTable toy_data_nonlinear(std::size_t n, std::uint64_t seed) {
  return toy_rows(n, seed, true);
}

}  // namespace fixtures
}  // namespace bnet
