#include "cmvm/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace cmvm {

int AdderGraph::num_inputs() const {
  int n = 0;
  for (const auto& node : nodes) n += node.kind == NodeKind::input;
  return n;
}

QInterval AdderGraph::output_qint(std::size_t i) const {
  const OutputRef& o = outputs.at(i);
  if (o.is_zero()) return QInterval::zero();
  QInterval q = nodes.at(o.node).qint.shifted(o.shift);
  return o.sign < 0 ? q.negated() : q;
}

int AdderGraph::output_depth(std::size_t i) const {
  const OutputRef& o = outputs.at(i);
  return o.is_zero() ? 0 : nodes.at(o.node).depth;
}

int GraphBuilder::add_input(const QInterval& q, int depth) {
  Node n;
  n.kind = NodeKind::input;
  n.input_index = graph_.num_inputs();
  n.qint = q;
  n.depth = depth;
  graph_.nodes.push_back(n);
  return static_cast<int>(graph_.nodes.size()) - 1;
}

int GraphBuilder::add_addsub(int a, int b, int sign, int shift) {
  const int size = static_cast<int>(graph_.nodes.size());
  if (a < 0 || b < 0 || a >= size || b >= size) throw std::out_of_range("add_addsub: operand does not exist");
  const Node& na = graph_.nodes[a];
  const Node& nb = graph_.nodes[b];
  Node n;
  n.kind = NodeKind::addsub;
  n.a = a;
  n.b = b;
  n.sign = sign < 0 ? -1 : 1;
  n.shift = shift;
  n.qint = qint_add(na.qint, nb.qint, n.sign, shift);
  n.depth = std::max(na.depth, nb.depth) + 1;
  n.cost = adder_cost(na.qint, nb.qint, n.sign, shift);
  graph_.nodes.push_back(n);
  return size;
}

Signal GraphBuilder::add(const Signal& x, const Signal& y, int sign, int shift) {
  if (y.is_zero()) return x;
  if (x.is_zero()) return {y.node, y.shift + shift, y.sign * sign};
  const int node = add_addsub(x.node, y.node, x.sign * sign * y.sign, y.shift + shift - x.shift);
  return {node, x.shift, x.sign};
}

QInterval GraphBuilder::qint(const Signal& s) const {
  if (s.is_zero()) return QInterval::zero();
  QInterval q = graph_.nodes.at(s.node).qint.shifted(s.shift);
  return s.sign < 0 ? q.negated() : q;
}

int GraphBuilder::depth(const Signal& s) const { return s.is_zero() ? 0 : graph_.nodes.at(s.node).depth; }

std::vector<Dyadic> evaluate(const AdderGraph& g, std::span<const Dyadic> x) {
  std::vector<Dyadic> value(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const Node& n = g.nodes[i];
    if (n.kind == NodeKind::input) {
      if (n.input_index < 0 || static_cast<std::size_t>(n.input_index) >= x.size())
        throw std::invalid_argument("evaluate: missing input value");
      const Dyadic& v = x[n.input_index];
      if (!n.qint.contains(v))
        throw std::domain_error("evaluate: input " + std::to_string(n.input_index) + " = " + v.to_string() +
                                " outside its interval");
      value[i] = v;
    } else {
      const Dyadic rhs = value[n.b].shifted(n.shift);
      value[i] = n.sign > 0 ? value[n.a] + rhs : value[n.a] - rhs;
    }
  }
  std::vector<Dyadic> y(g.outputs.size());
  for (std::size_t i = 0; i < g.outputs.size(); ++i) {
    const OutputRef& o = g.outputs[i];
    if (o.is_zero()) continue;
    const Dyadic v = value[o.node].shifted(o.shift);
    y[i] = o.sign < 0 ? -v : v;
  }
  return y;
}

namespace {

// Widths of values live across each register boundary when every adder level
// is pipelined (boundaries sit after levels 1 .. D-1).
std::int64_t register_bits(const AdderGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<int> last_use(n, -1);
  int max_depth = 0;
  for (const auto& o : g.outputs)
    if (!o.is_zero()) max_depth = std::max(max_depth, g.nodes[o.node].depth);
  for (const auto& node : g.nodes) {
    if (node.kind != NodeKind::addsub) continue;
    last_use[node.a] = std::max(last_use[node.a], node.depth);
    last_use[node.b] = std::max(last_use[node.b], node.depth);
  }
  for (const auto& o : g.outputs)
    if (!o.is_zero()) last_use[o.node] = max_depth;
  std::int64_t bits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (last_use[i] < 0) continue;
    const int crossings = last_use[i] - std::max(g.nodes[i].depth, 1);
    if (crossings > 0) bits += std::int64_t(crossings) * bitwidth_spec(g.nodes[i].qint).width;
  }
  return bits;
}

} // namespace

GraphStats stats(const AdderGraph& g) {
  GraphStats s;
  int max_in = 0, max_out = 0;
  bool any_input = false, any_output = false;
  for (const auto& n : g.nodes) {
    if (n.kind == NodeKind::addsub) {
      ++s.adders;
      s.cost += n.cost;
    } else {
      max_in = any_input ? std::max(max_in, n.depth) : n.depth;
      any_input = true;
    }
  }
  for (const auto& o : g.outputs) {
    if (o.is_zero()) continue;
    const Node& n = g.nodes[o.node];
    max_out = any_output ? std::max(max_out, n.depth) : n.depth;
    any_output = true;
    if (o.sign < 0) s.cost += bitwidth_spec(n.qint).width;
  }
  s.depth = any_output ? std::max(0, max_out - max_in) : 0;
  s.registers_estimate = register_bits(g);
  return s;
}

std::vector<std::string> validate(const AdderGraph& g) {
  std::vector<std::string> findings;
  auto report = [&](const std::string& f) {
    if (std::find(findings.begin(), findings.end(), f) == findings.end()) findings.push_back(f);
  };
  const int size = static_cast<int>(g.nodes.size());
  std::vector<char> used(g.nodes.size(), 0);
  int next_input = 0;
  for (int i = 0; i < size; ++i) {
    const Node& n = g.nodes[i];
    if (n.kind == NodeKind::input) {
      if (n.input_index != next_input++) report("bad-input-index");
      continue;
    }
    if (n.a < 0 || n.b < 0 || n.a >= size || n.b >= size) {
      report("bad-operand");
      continue;
    }
    if (n.a >= i || n.b >= i) {
      report("operand-after-use");
      continue;
    }
    used[n.a] = used[n.b] = 1;
    const Node& na = g.nodes[n.a];
    const Node& nb = g.nodes[n.b];
    if (!(n.qint == qint_add(na.qint, nb.qint, n.sign, n.shift))) report("qint-mismatch");
    if (n.depth != std::max(na.depth, nb.depth) + 1) report("depth-mismatch");
    if (n.cost != adder_cost(na.qint, nb.qint, n.sign, n.shift)) report("cost-mismatch");
  }
  for (const auto& o : g.outputs) {
    if (o.is_zero()) continue;
    if (o.node >= size) {
      report("bad-output");
      continue;
    }
    used[o.node] = 1;
  }
  for (int i = 0; i < size; ++i)
    if (g.nodes[i].kind == NodeKind::addsub && !used[i]) report("dead-node");
  return findings;
}

AdderGraph prune_dead(const AdderGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<char> live(n, 0);
  for (const auto& o : g.outputs)
    if (!o.is_zero()) live[o.node] = 1;
  for (std::size_t i = n; i-- > 0;) {
    const Node& node = g.nodes[i];
    if (node.kind == NodeKind::input) live[i] = 1;
    if (!live[i] || node.kind != NodeKind::addsub) continue;
    live[node.a] = live[node.b] = 1;
  }
  AdderGraph out;
  std::vector<int> remap(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!live[i]) continue;
    Node node = g.nodes[i];
    if (node.kind == NodeKind::addsub) {
      node.a = remap[node.a];
      node.b = remap[node.b];
    }
    remap[i] = static_cast<int>(out.nodes.size());
    out.nodes.push_back(node);
  }
  out.outputs = g.outputs;
  for (auto& o : out.outputs)
    if (!o.is_zero()) o.node = remap[o.node];
  return out;
}

} // namespace cmvm
