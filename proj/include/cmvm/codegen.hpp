#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmvm/graph.hpp"
#include "cmvm/matrix.hpp"

namespace cmvm {

/// Raised when a graph handed to the emitters fails validation.
class InvalidSolution : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised by parse_json on malformed or inconsistent input.
class SchemaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct CodegenOptions {
  /// Adder levels per pipeline stage; 0 emits a combinational module.
  int pipeline_every = 0;
  std::string module_name = "cmvm";
  /// Latency of each adder in levels; unset means 1 for every adder.
  std::function<int(const Node&)> latency;
};

/// Per-node placement used by the Verilog emitter.
struct PipelinePlan {
  std::vector<int> level;  ///< inputs 0, adders max(operand levels) + latency
  std::vector<int> stage;  ///< stage in which the node is computed
  int stages = 1;          ///< ceil(max output level / pipeline_every), at least 1
  int latency() const { return stages - 1; }  ///< clock cycles input to output
};

PipelinePlan plan_pipeline(const AdderGraph& g, const CodegenOptions& options);

/// Verilog-2001 module. Every wire holds its value as an integer count of its
/// own step 2^step_exp, in two's complement of the node's BitWidthSpec width;
/// operand alignment is done with zero-padding concatenation. Ports:
/// x<j> inputs, y<i> outputs, plus clk when pipelined. Registers sit after
/// every `pipeline_every` levels and every value that crosses a boundary is
/// registered, so all input-to-output paths have the same latency.
/// Throws InvalidSolution if validate(g) reports anything.
std::string emit_verilog(const AdderGraph& g, const CodegenOptions& options = {});

/// Graph dump:
///   {inputs:[{id,index,qint,depth}], nodes:[{id,kind,a,b,sign,shift,qint,depth,cost}],
///    outputs:[{node,shift,sign}], stats:{adders,depth,cost}}
/// with qint = {low_mantissa, low_exp, high_mantissa, high_exp, step_exp} and
/// node = -1 for a constant-zero output.
std::string emit_json(const AdderGraph& g);

/// Inverse of emit_json. Throws SchemaError.
AdderGraph parse_json(const std::string& text);

/// Self-checking testbench for the module emitted with `options`: drives each
/// vector, waits the pipeline latency, and compares every output port against
/// x^T m baked in as literals.
std::string emit_testbench(const AdderGraph& g, const Matrix& m, const std::vector<std::vector<Dyadic>>& vectors,
                           const CodegenOptions& options = {});

} // namespace cmvm
