#include "cmvm/codegen.hpp"

#include <algorithm>
#include <sstream>

#include "cmvm/verify.hpp"
#include "json.hpp"

namespace cmvm {

namespace {

using ojson = nlohmann::ordered_json;

int wire_width(const QInterval& q) { return std::max(1, bitwidth_spec(q).width); }

std::string decl(int width) { return "signed [" + std::to_string(width - 1) + ":0]"; }

std::string reg_name(int node, int delay) {
  return "n" + std::to_string(node) + (delay > 0 ? "_p" + std::to_string(delay) : "");
}

// Operand `name` scaled by 2^pad through zero-padding.
std::string aligned(const std::string& name, int pad) {
  if (pad == 0) return name;
  return "$signed({" + name + ", " + std::to_string(pad) + "'b0})";
}

// Two's complement literal of `value` in `width` bits.
std::string literal(std::int64_t value, int width) {
  const std::uint64_t mask = width >= 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << width) - 1;
  std::ostringstream os;
  os << width << "'sh" << std::hex << (static_cast<std::uint64_t>(value) & mask);
  return os.str();
}

void require_valid(const AdderGraph& g) {
  const auto findings = validate(g);
  if (findings.empty()) return;
  std::string msg = "graph fails validation:";
  for (const auto& f : findings) msg += " " + f;
  throw InvalidSolution(msg);
}

ojson qint_json(const QInterval& q) {
  return {{"low_mantissa", q.low.mantissa()},
          {"low_exp", q.low.exponent()},
          {"high_mantissa", q.high.mantissa()},
          {"high_exp", q.high.exponent()},
          {"step_exp", q.step_exp}};
}

QInterval qint_from_json(const ojson& j) {
  QInterval q;
  q.low = Dyadic(j.at("low_mantissa").get<std::int64_t>(), j.at("low_exp").get<int>());
  q.high = Dyadic(j.at("high_mantissa").get<std::int64_t>(), j.at("high_exp").get<int>());
  q.step_exp = j.at("step_exp").get<int>();
  return q;
}

std::vector<int> input_nodes(const AdderGraph& g) {
  std::vector<int> ids(g.num_inputs(), -1);
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (g.nodes[i].kind == NodeKind::input) ids.at(g.nodes[i].input_index) = static_cast<int>(i);
  return ids;
}

} // namespace

PipelinePlan plan_pipeline(const AdderGraph& g, const CodegenOptions& options) {
  if (options.pipeline_every < 0) throw std::invalid_argument("pipeline_every must be >= 0");
  PipelinePlan p;
  const std::size_t n = g.nodes.size();
  p.level.assign(n, 0);
  p.stage.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = g.nodes[i];
    if (node.kind != NodeKind::addsub) continue;
    const int lat = options.latency ? options.latency(node) : 1;
    if (lat < 1) throw std::invalid_argument("adder latency must be >= 1");
    p.level[i] = std::max(p.level[node.a], p.level[node.b]) + lat;
  }
  int top = 0;
  for (const auto& o : g.outputs)
    if (!o.is_zero()) top = std::max(top, p.level[o.node]);
  const int k = options.pipeline_every;
  if (k > 0) {
    p.stages = std::max(1, (top + k - 1) / k);
    for (std::size_t i = 0; i < n; ++i) p.stage[i] = p.level[i] == 0 ? 0 : (p.level[i] - 1) / k;
  }
  return p;
}

std::string emit_verilog(const AdderGraph& g, const CodegenOptions& options) {
  require_valid(g);
  const PipelinePlan plan = plan_pipeline(g, options);
  const bool piped = options.pipeline_every > 0;
  const std::size_t n = g.nodes.size();
  const std::vector<int> inputs = input_nodes(g);
  const int last = plan.stages - 1;

  // Longest register chain each node needs.
  std::vector<int> delay(n, 0);
  for (const auto& node : g.nodes) {
    if (node.kind != NodeKind::addsub) continue;
    const int s = plan.stage[&node - g.nodes.data()];
    delay[node.a] = std::max(delay[node.a], s - plan.stage[node.a]);
    delay[node.b] = std::max(delay[node.b], s - plan.stage[node.b]);
  }
  for (const auto& o : g.outputs)
    if (!o.is_zero()) delay[o.node] = std::max(delay[o.node], last - plan.stage[o.node]);

  std::ostringstream os;
  os << "module " << options.module_name << " (\n";
  std::vector<std::string> ports;
  if (piped) ports.push_back("  input wire clk");
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const QInterval& q = g.nodes[inputs[j]].qint;
    ports.push_back("  input wire " + decl(wire_width(q)) + " x" + std::to_string(j) + "  // step 2^" +
                    std::to_string(q.step_exp));
  }
  for (std::size_t i = 0; i < g.outputs.size(); ++i) {
    const QInterval q = g.output_qint(i);
    ports.push_back("  output wire " + decl(wire_width(q)) + " y" + std::to_string(i) + "  // step 2^" +
                    std::to_string(q.step_exp));
  }
  for (std::size_t i = 0; i < ports.size(); ++i) {
    std::string line = ports[i];
    if (i + 1 < ports.size()) {
      const auto c = line.find("  //");
      line = c == std::string::npos ? line + "," : line.insert(c, ",");
    }
    os << line << "\n";
  }
  os << ");\n";

  std::ostringstream regs;
  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = g.nodes[i];
    const int w = wire_width(node.qint);
    os << "  wire " << decl(w) << " n" << i << ";\n";
    if (node.kind == NodeKind::input) {
      os << "  assign n" << i << " = x" << node.input_index << ";\n";
    } else {
      const Node& a = g.nodes[node.a];
      const Node& b = g.nodes[node.b];
      const int s = plan.stage[i];
      const std::string ta = aligned(reg_name(node.a, s - plan.stage[node.a]), a.qint.step_exp - node.qint.step_exp);
      const std::string tb =
          aligned(reg_name(node.b, s - plan.stage[node.b]), b.qint.step_exp + node.shift - node.qint.step_exp);
      os << "  assign n" << i << " = " << ta << (node.sign > 0 ? " + " : " - ") << tb << ";\n";
    }
    for (int d = 1; d <= delay[i]; ++d) {
      os << "  reg " << decl(w) << " " << reg_name(static_cast<int>(i), d) << ";\n";
      regs << "    " << reg_name(static_cast<int>(i), d) << " <= " << reg_name(static_cast<int>(i), d - 1) << ";\n";
    }
  }
  if (!regs.str().empty()) os << "  always @(posedge clk) begin\n" << regs.str() << "  end\n";
  for (std::size_t i = 0; i < g.outputs.size(); ++i) {
    const OutputRef& o = g.outputs[i];
    os << "  assign y" << i << " = ";
    if (o.is_zero())
      os << "1'sb0";
    else
      os << (o.sign < 0 ? "-" : "") << reg_name(o.node, last - plan.stage[o.node]);
    os << ";\n";
  }
  os << "endmodule\n";
  return os.str();
}

std::string emit_json(const AdderGraph& g) {
  ojson j;
  j["inputs"] = ojson::array();
  j["nodes"] = ojson::array();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const Node& n = g.nodes[i];
    if (n.kind == NodeKind::input) {
      j["inputs"].push_back({{"id", i}, {"index", n.input_index}, {"qint", qint_json(n.qint)}, {"depth", n.depth}});
    } else {
      j["nodes"].push_back({{"id", i},
                            {"kind", "addsub"},
                            {"a", n.a},
                            {"b", n.b},
                            {"sign", n.sign},
                            {"shift", n.shift},
                            {"qint", qint_json(n.qint)},
                            {"depth", n.depth},
                            {"cost", n.cost}});
    }
  }
  j["outputs"] = ojson::array();
  for (const auto& o : g.outputs) j["outputs"].push_back({{"node", o.node}, {"shift", o.shift}, {"sign", o.sign}});
  const GraphStats s = stats(g);
  j["stats"] = {{"adders", s.adders}, {"depth", s.depth}, {"cost", s.cost}};
  return j.dump(2) + "\n";
}

AdderGraph parse_json(const std::string& text) {
  try {
    const ojson j = ojson::parse(text);
    const auto& ins = j.at("inputs");
    const auto& adds = j.at("nodes");
    const std::size_t total = ins.size() + adds.size();
    AdderGraph g;
    g.nodes.resize(total);
    std::vector<char> seen(total, 0);
    auto claim = [&](const ojson& e) {
      const auto id = e.at("id").get<std::int64_t>();
      if (id < 0 || static_cast<std::size_t>(id) >= total || seen[id])
        throw SchemaError("node id " + std::to_string(id) + " is out of range or repeated");
      seen[id] = 1;
      return static_cast<std::size_t>(id);
    };
    for (const auto& e : ins) {
      Node& n = g.nodes[claim(e)];
      n.kind = NodeKind::input;
      n.input_index = e.at("index").get<int>();
      n.qint = qint_from_json(e.at("qint"));
      n.depth = e.at("depth").get<int>();
    }
    for (const auto& e : adds) {
      Node& n = g.nodes[claim(e)];
      if (e.at("kind").get<std::string>() != "addsub") throw SchemaError("unknown node kind");
      n.kind = NodeKind::addsub;
      n.a = e.at("a").get<int>();
      n.b = e.at("b").get<int>();
      n.sign = e.at("sign").get<int>();
      n.shift = e.at("shift").get<int>();
      n.qint = qint_from_json(e.at("qint"));
      n.depth = e.at("depth").get<int>();
      n.cost = e.at("cost").get<std::int64_t>();
      if (n.sign != 1 && n.sign != -1) throw SchemaError("sign must be +1 or -1");
    }
    for (const auto& e : j.at("outputs")) {
      OutputRef o{e.at("node").get<int>(), e.at("shift").get<int>(), e.at("sign").get<int>()};
      if (o.node >= static_cast<int>(total)) throw SchemaError("output refers to a missing node");
      if (o.sign != 1 && o.sign != -1) throw SchemaError("sign must be +1 or -1");
      if (o.node < 0) o = OutputRef{};
      g.outputs.push_back(o);
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(e.what());
  } catch (const std::domain_error& e) {
    throw SchemaError(e.what());
  } catch (const std::overflow_error& e) {
    throw SchemaError(e.what());
  }
}

std::string emit_testbench(const AdderGraph& g, const Matrix& m, const std::vector<std::vector<Dyadic>>& vectors,
                           const CodegenOptions& options) {
  require_valid(g);
  const PipelinePlan plan = plan_pipeline(g, options);
  const bool piped = options.pipeline_every > 0;
  const std::vector<int> inputs = input_nodes(g);
  if (inputs.size() != m.rows() || g.outputs.size() != m.cols())
    throw std::invalid_argument("emit_testbench: graph shape does not match the matrix");

  std::ostringstream os;
  os << "`timescale 1ns/1ps\n";
  os << "module tb_" << options.module_name << ";\n";
  os << "  reg clk = 1'b0;\n";
  os << "  integer errors = 0;\n";
  for (std::size_t j = 0; j < inputs.size(); ++j)
    os << "  reg " << decl(wire_width(g.nodes[inputs[j]].qint)) << " x" << j << ";\n";
  for (std::size_t i = 0; i < g.outputs.size(); ++i)
    os << "  wire " << decl(wire_width(g.output_qint(i))) << " y" << i << ";\n";
  os << "  " << options.module_name << " dut (";
  std::vector<std::string> conns;
  if (piped) conns.push_back(".clk(clk)");
  for (std::size_t j = 0; j < inputs.size(); ++j) conns.push_back(".x" + std::to_string(j) + "(x" + std::to_string(j) + ")");
  for (std::size_t i = 0; i < g.outputs.size(); ++i)
    conns.push_back(".y" + std::to_string(i) + "(y" + std::to_string(i) + ")");
  for (std::size_t k = 0; k < conns.size(); ++k) os << (k ? ", " : "") << conns[k];
  os << ");\n";
  os << "  always #5 clk = ~clk;\n";
  os << "  initial begin\n";
  for (std::size_t v = 0; v < vectors.size(); ++v) {
    const auto& x = vectors[v];
    if (x.size() != inputs.size()) throw std::invalid_argument("emit_testbench: vector length mismatch");
    for (std::size_t j = 0; j < x.size(); ++j) {
      const QInterval& q = g.nodes[inputs[j]].qint;
      if (!q.contains(x[j])) throw std::invalid_argument("emit_testbench: input outside its interval");
      os << "    x" << j << " = " << literal(x[j].to_units(q.step_exp), wire_width(q)) << ";\n";
    }
    if (piped && plan.latency() > 0)
      os << "    repeat (" << plan.latency() << ") @(posedge clk);\n";
    os << "    #1;\n";
    const std::vector<Dyadic> y = oracle(m, x);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const QInterval q = g.output_qint(i);
      const std::string want = literal(y[i].to_units(q.step_exp), wire_width(q));
      os << "    if (y" << i << " !== " << want << ") begin errors = errors + 1; $display(\"vector " << v
         << " output " << i << ": got %0d\", y" << i << "); end\n";
    }
  }
  os << "    if (errors == 0) $display(\"PASS\"); else $display(\"FAIL %0d\", errors);\n";
  os << "    $finish;\n";
  os << "  end\n";
  os << "endmodule\n";
  return os.str();
}

} // namespace cmvm
