#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmvm/fxp.hpp"

namespace cmvm {

enum class NodeKind { input, addsub };

/// Adder-graph node. An addsub node computes `a + sign * (b << shift)`.
struct Node {
  NodeKind kind = NodeKind::input;
  int input_index = -1;  // input nodes only
  int a = -1;            // addsub operands (node ids)
  int b = -1;
  int sign = 1;
  int shift = 0;
  QInterval qint;
  int depth = 0;
  std::int64_t cost = 0;

  bool operator==(const Node&) const = default;
};

/// Graph output `sign * (node << shift)`; node < 0 denotes constant zero.
struct OutputRef {
  int node = -1;
  int shift = 0;
  int sign = 1;

  bool is_zero() const { return node < 0; }
  bool operator==(const OutputRef&) const = default;
};

/// Topologically ordered DAG of inputs and two-operand adders.
struct AdderGraph {
  std::vector<Node> nodes;
  std::vector<OutputRef> outputs;

  int num_inputs() const;
  /// Interval of an output value (zero interval for constant outputs).
  QInterval output_qint(std::size_t i) const;
  int output_depth(std::size_t i) const;

  bool operator==(const AdderGraph&) const = default;
};

struct GraphStats {
  int adders = 0;
  int depth = 0;
  std::int64_t cost = 0;
  std::int64_t registers_estimate = 0;

  bool operator==(const GraphStats&) const = default;
};

/// A value available in the graph: `sign * (node << shift)`, or zero.
struct Signal {
  int node = -1;
  int shift = 0;
  int sign = 1;

  bool is_zero() const { return node < 0; }
};

/// Appends nodes while maintaining the qint/depth/cost invariants.
class GraphBuilder {
public:
  int add_input(const QInterval& q, int depth = 0);
  int add_addsub(int a, int b, int sign, int shift);

  /// Signal for `x + sign * (y << shift)`.
  Signal add(const Signal& x, const Signal& y, int sign, int shift);

  QInterval qint(const Signal& s) const;
  int depth(const Signal& s) const;

  const AdderGraph& graph() const { return graph_; }
  AdderGraph& graph() { return graph_; }
  AdderGraph release() { return std::move(graph_); }

private:
  AdderGraph graph_;
};

/// Exact evaluation. Throws std::domain_error if some x_j lies outside the
/// interval of input j.
std::vector<Dyadic> evaluate(const AdderGraph& g, std::span<const Dyadic> x);

/// adders: addsub count. depth: max output depth minus max input depth.
/// cost: sum of adder costs plus one adder-width per negated output.
/// registers_estimate: bits held at single-level pipeline boundaries.
GraphStats stats(const AdderGraph& g);

/// Structural findings: "operand-after-use", "bad-operand", "qint-mismatch",
/// "depth-mismatch", "cost-mismatch", "bad-input-index", "dead-node",
/// "bad-output". Empty when the graph is well formed.
std::vector<std::string> validate(const AdderGraph& g);

/// Drops addsub nodes unreachable from any output and renumbers the rest.
AdderGraph prune_dead(const AdderGraph& g);

} // namespace cmvm
