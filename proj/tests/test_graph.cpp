#include <algorithm>
#include <random>

#include "cmvm/codegen.hpp"
#include "cmvm/cse.hpp"
#include "cmvm/graph.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace cmvm;

namespace {

const Matrix h264{{1, 2, 1, 1}, {1, 1, -1, -2}, {1, -1, -1, 2}, {1, -2, 1, -1}};

std::vector<Dyadic> vec(std::initializer_list<std::int64_t> v) {
  std::vector<Dyadic> out;
  for (auto x : v) out.emplace_back(x);
  return out;
}

bool has(const std::vector<std::string>& findings, const std::string& what) {
  return std::find(findings.begin(), findings.end(), what) != findings.end();
}

} // namespace

TEST_CASE("builder keeps interval, depth and cost invariants") {
  GraphBuilder b;
  const QInterval q8 = qint_from_fixed({true, 8, 8});
  const int x0 = b.add_input(q8);
  const int x1 = b.add_input(q8, 2);
  const int n = b.add_addsub(x0, x1, -1, 3);
  const Node& node = b.graph().nodes[n];
  CHECK(node.qint == qint_add(q8, q8, -1, 3));
  CHECK(node.depth == 3);
  CHECK(node.cost == adder_cost(q8, q8, -1, 3));
  const Signal s = b.add({x0, 1, -1}, {x1, 0, 1}, 1, 2);
  CHECK(s.shift == 1);
  CHECK(s.sign == -1);
  CHECK(has(validate(b.graph()), "dead-node"));
  b.graph().outputs = {{n, 0, 1}, {s.node, s.shift, s.sign}};
  CHECK(validate(b.graph()).empty());
}

TEST_CASE("evaluate examples") {
  const Solution id = solve(Matrix{{1, 0}, {0, 1}}, BitWidthSpec{true, 8, 8});
  CHECK(evaluate(id.graph, vec({5, -7})) == vec({5, -7}));

  const Solution h = solve(h264, BitWidthSpec{true, 8, 8});
  CHECK(evaluate(h.graph, vec({1, 1, 1, 1})) == vec({4, 0, 0, 0}));
  CHECK(evaluate(h.graph, vec({0, 0, 0, 0})) == vec({0, 0, 0, 0}));
  CHECK(evaluate(h.graph, vec({1, 0, 0, 0})) == vec({1, 2, 1, 1}));
  CHECK_THROWS_AS(evaluate(h.graph, vec({128, 0, 0, 0})), std::domain_error);
}

TEST_CASE("evaluate agrees with x^T M on random solutions") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix m = oracle::random_int_matrix(rng, 1 + int(rng() % 8), 1 + int(rng() % 8), 8, 0.2);
    const Solution s = solve(m, BitWidthSpec{true, 8, 8}, {.dc = int(rng() % 3) - 1});
    for (int k = 0; k < 20; ++k) {
      const auto x = oracle::random_vector(rng, m.rows(), 8);
      REQUIRE(evaluate(s.graph, x) == oracle::xtm(x, m));
    }
  }
}

TEST_CASE("stats") {
  CHECK(stats(AdderGraph{}) == GraphStats{});
  const Solution h = solve(h264, BitWidthSpec{true, 8, 8});
  const GraphStats st = stats(h.graph);
  CHECK(st == h.stats);
  const auto adders = std::count_if(h.graph.nodes.begin(), h.graph.nodes.end(),
                                    [](const Node& n) { return n.kind == NodeKind::addsub; });
  CHECK(st.adders == adders);
  std::int64_t cost = 0;
  for (const Node& n : h.graph.nodes) cost += n.cost;
  CHECK(st.cost >= cost);
  int depth = 0;
  for (std::size_t i = 0; i < h.graph.outputs.size(); ++i) depth = std::max(depth, h.graph.output_depth(i));
  CHECK(st.depth == depth);
}

TEST_CASE("validate reports corruptions") {
  const Solution h = solve(h264, BitWidthSpec{true, 8, 8});
  REQUIRE(validate(h.graph).empty());
  const int last = static_cast<int>(h.graph.nodes.size()) - 1;
  REQUIRE(h.graph.nodes[last].kind == NodeKind::addsub);

  AdderGraph g = h.graph;
  g.nodes[last].a = last;
  CHECK(has(validate(g), "operand-after-use"));

  g = h.graph;
  g.nodes[last].qint.high = g.nodes[last].qint.high + Dyadic(1, g.nodes[last].qint.step_exp);
  CHECK(has(validate(g), "qint-mismatch"));

  g = h.graph;
  g.nodes[last].depth += 1;
  CHECK(has(validate(g), "depth-mismatch"));

  g = h.graph;
  g.nodes[last].cost += 1;
  CHECK(has(validate(g), "cost-mismatch"));

  g = h.graph;
  g.outputs[0].node = last + 5;
  CHECK(has(validate(g), "bad-output"));

  g = h.graph;
  GraphBuilder b;
  b.graph() = g;
  b.add_addsub(0, 1, 1, 0);
  CHECK(has(validate(b.graph()), "dead-node"));
  CHECK(prune_dead(b.graph()) == h.graph);
}

TEST_CASE("prune_dead renumbers operands and outputs") {
  GraphBuilder b;
  const QInterval q = qint_from_fixed({true, 8, 8});
  const int x0 = b.add_input(q), x1 = b.add_input(q);
  b.add_addsub(x0, x1, 1, 0);  // dead
  const int live = b.add_addsub(x0, x1, -1, 1);
  AdderGraph g = b.release();
  g.outputs = {{live, 0, 1}, {-1, 0, 1}};
  const AdderGraph p = prune_dead(g);
  CHECK(p.nodes.size() == 3);
  CHECK(p.outputs[0].node == 2);
  CHECK(p.outputs[1].is_zero());
  CHECK(validate(p).empty());
  CHECK(evaluate(p, vec({3, 4})) == evaluate(g, vec({3, 4})));
}

TEST_CASE("JSON round-trip preserves the graph and its stats") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m = oracle::random_int_matrix(rng, 1 + int(rng() % 6), 1 + int(rng() % 6), 8, 0.3);
    if (trial % 2) m(0, 0) = Dyadic(3, -4);
    const Solution s = solve(m, BitWidthSpec{true, 6, 2});
    const AdderGraph back = parse_json(emit_json(s.graph));
    CHECK(back == s.graph);
    CHECK(stats(back) == s.stats);
  }
}
