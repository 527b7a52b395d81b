// cmvm: optimize, emit, bench and verify constant matrix-vector multipliers.
//
// Exit codes: 0 success, 1 bad input (parse/schema/usage), 2 verification
// mismatch, 3 depth budget infeasible.

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cmvm/bench.hpp"
#include "cmvm/codegen.hpp"
#include "cmvm/cse.hpp"
#include "cmvm/matrix_io.hpp"
#include "cmvm/verify.hpp"

namespace {

using namespace cmvm;

constexpr int k_ok = 0, k_bad_input = 1, k_mismatch = 2, k_infeasible = 3;

int default_threads() {
  if (const char* env = std::getenv("CMVM_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MatrixParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<int> parse_sizes(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

struct OptimizeArgs {
  std::string matrix;
  int dc = 2;
  int input_bits = 8;
  int input_int_bits = -1;
  bool input_unsigned = false;
  bool unweighted = false;
  int frac_bits = 32;
  std::string out_json;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
};

int cmd_optimize(const OptimizeArgs& a) {
  const Matrix m = load_matrix(a.matrix, a.frac_bits);
  const BitWidthSpec in{!a.input_unsigned, a.input_bits, a.input_int_bits < 0 ? a.input_bits : a.input_int_bits};
  SolveOptions so;
  so.dc = a.dc;
  so.weighting = a.unweighted ? Weighting::unweighted : Weighting::weighted;
  const Solution s = solve(m, in, so);
  std::cout << "adders: " << s.stats.adders << "\n";
  std::cout << "depth: " << s.stats.depth << "\n";
  std::cout << "cost: " << s.stats.cost << "\n";
  std::cout << "runtime_ms: " << std::fixed << std::setprecision(3) << s.elapsed_ms << "\n";
  if (!a.out_json.empty()) write_file(a.out_json, emit_json(s.graph));
  VerifyOptions vo;
  vo.parallel = true;
  const Report r = check_random(s.graph, m, a.trials, a.seed, vo);
  std::cout << "verify: " << (r.equivalent() ? "equivalent" : "MISMATCH") << " (" << r.vectors << " random vectors)\n";
  if (!r.equivalent()) {
    std::cerr << r.text();
    return k_mismatch;
  }
  return k_ok;
}

struct EmitArgs {
  std::string graph;
  std::string verilog;
  int pipeline_every = 0;
  std::string module = "cmvm";
  std::string testbench;
  std::string matrix;
  int vectors = 16;
  std::uint64_t seed = 0;
};

int cmd_emit(const EmitArgs& a) {
  const AdderGraph g = parse_json(read_file(a.graph));
  if (const auto findings = validate(g); !findings.empty()) {
    std::cerr << "error: graph fails validation:";
    for (const auto& f : findings) std::cerr << " " << f;
    std::cerr << "\n";
    return k_bad_input;
  }
  CodegenOptions co;
  co.pipeline_every = a.pipeline_every;
  co.module_name = a.module;
  const std::string v = emit_verilog(g, co);
  if (a.verilog.empty())
    std::cout << v;
  else
    write_file(a.verilog, v);
  if (!a.testbench.empty()) {
    if (a.matrix.empty()) throw CLI::ValidationError("--testbench needs --matrix for the expected outputs");
    const Matrix m = load_matrix(a.matrix);
    std::vector<std::vector<Dyadic>> vecs;
    std::vector<QInterval> qs(g.num_inputs());
    for (const auto& n : g.nodes)
      if (n.kind == NodeKind::input) qs[n.input_index] = n.qint;
    for (int t = 0; t < a.vectors; ++t) {
      SplitMix64 rng(a.seed + std::uint64_t(t + 1) * 0x9E3779B97F4A7C15ull);
      std::vector<Dyadic> x;
      for (const auto& q : qs) {
        const std::uint64_t count = std::uint64_t((q.high - q.low).to_units(q.step_exp)) + 1;
        const auto k = static_cast<std::int64_t>((static_cast<unsigned __int128>(rng.next()) * count) >> 64);
        x.push_back(q.low + Dyadic(k, q.step_exp));
      }
      vecs.push_back(std::move(x));
    }
    write_file(a.testbench, emit_testbench(g, m, vecs, co));
  }
  return k_ok;
}

struct BenchArgs {
  std::string sizes = "8,16";
  int bw = 8;
  int dc = -1;
  int trials = 25;
  std::uint64_t seed = 0;
  std::string csv;
  std::string json;
  int workers = 0;
  bool unweighted = false;
};

int cmd_bench(const BenchArgs& a) {
  SuiteOptions so;
  so.workers = a.workers > 0 ? a.workers : default_threads();
  so.weighting = a.unweighted ? Weighting::unweighted : Weighting::weighted;
  const SuiteResult r = run_suite(parse_sizes(a.sizes), a.bw, a.dc, a.trials, a.seed, so);
  std::cout << "size  trials  mean_step  mean_adders  sd_adders  mean_ms\n";
  for (const auto& row : r.rows)
    std::cout << std::setw(4) << row.size << std::setw(8) << row.trials << std::fixed << std::setprecision(2)
              << std::setw(11) << row.mean_step << std::setw(13) << row.mean_adders << std::setw(11) << row.sd_adders
              << std::setw(9) << row.mean_ms << "\n";
  if (!a.csv.empty()) write_file(a.csv, r.csv());
  if (!a.json.empty()) write_file(a.json, r.json());
  return k_ok;
}

struct VerifyArgs {
  std::string matrix;
  std::string graph;
  bool exhaustive = false;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  bool json = false;
};

int cmd_verify(const VerifyArgs& a) {
  const Matrix m = load_matrix(a.matrix);
  const AdderGraph g = parse_json(read_file(a.graph));
  VerifyOptions vo;
  vo.parallel = true;
  const Report r = a.exhaustive ? check_exhaustive(g, m, vo) : check_random(g, m, a.trials, a.seed, vo);
  std::cout << (a.json ? r.json() + "\n" : r.text());
  return r.equivalent() ? k_ok : k_mismatch;
}

} // namespace

int main(int argc, char** argv) {
  omp_set_num_threads(default_threads());
  CLI::App app{"Multiplierless constant matrix-vector multiplication optimizer"};
  app.require_subcommand(1);

  OptimizeArgs oa;
  auto* opt = app.add_subcommand("optimize", "Optimize a matrix into an adder graph and verify it");
  opt->add_option("matrix", oa.matrix, "Matrix file (.csv decimals or .json mantissa/exp)")->required();
  opt->add_option("--dc", oa.dc, "Extra adder depth over the minimum; -1 for none")->capture_default_str();
  opt->add_option("--input-bits", oa.input_bits, "Input width in bits")->capture_default_str();
  opt->add_option("--input-int-bits", oa.input_int_bits, "Input integer bits including sign (default: width)");
  opt->add_flag("--input-unsigned", oa.input_unsigned, "Inputs are unsigned");
  opt->add_flag("--input-signed{false}", oa.input_unsigned, "Inputs are signed (default)");
  opt->add_flag("--unweighted", oa.unweighted, "Rank subexpressions by frequency alone");
  opt->add_flag("--weighted{false}", oa.unweighted, "Rank by frequency times overlap bits (default)");
  opt->add_option("--frac-bits", oa.frac_bits, "Fractional-bit budget for CSV literals")->capture_default_str();
  opt->add_option("--out-json", oa.out_json, "Write the adder graph as JSON");
  opt->add_option("--trials", oa.trials, "Random verification vectors")->capture_default_str();
  opt->add_option("--seed", oa.seed, "Verification seed")->capture_default_str();

  EmitArgs ea;
  auto* emit = app.add_subcommand("emit", "Emit Verilog from an adder-graph JSON file");
  emit->add_option("graph", ea.graph, "Adder-graph JSON")->required();
  emit->add_option("--verilog", ea.verilog, "Output Verilog file (default: stdout)");
  emit->add_option("--pipeline-every", ea.pipeline_every, "Adder levels per pipeline stage; 0 = combinational")
      ->capture_default_str();
  emit->add_option("--module", ea.module, "Module name")->capture_default_str();
  emit->add_option("--testbench", ea.testbench, "Also write a self-checking testbench");
  emit->add_option("--matrix", ea.matrix, "Matrix for the testbench's expected outputs");
  emit->add_option("--vectors", ea.vectors, "Testbench vectors")->capture_default_str();
  emit->add_option("--seed", ea.seed, "Testbench vector seed")->capture_default_str();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Random-matrix benchmark");
  bench->add_option("--sizes", ba.sizes, "Comma-separated matrix sizes")->capture_default_str();
  bench->add_option("--bw", ba.bw, "Entry bit width")->capture_default_str();
  bench->add_option("--dc", ba.dc, "Delay constraint; -1 for none")->capture_default_str();
  bench->add_option("--trials", ba.trials, "Matrices per size")->capture_default_str();
  bench->add_option("--seed", ba.seed, "Suite seed")->capture_default_str();
  bench->add_option("--csv", ba.csv, "Per-trial CSV output");
  bench->add_option("--json", ba.json, "Summary and per-trial JSON output");
  bench->add_option("--workers", ba.workers, "Concurrent trials (default: CMVM_NUM_THREADS or all cores)");
  bench->add_flag("--unweighted", ba.unweighted, "Rank subexpressions by frequency alone");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Check an adder graph against its matrix");
  ver->add_option("matrix", va.matrix, "Matrix file")->required();
  ver->add_option("graph", va.graph, "Adder-graph JSON")->required();
  auto* exh = ver->add_flag("--exhaustive", va.exhaustive, "Enumerate the whole input space");
  ver->add_option("--trials", va.trials, "Random vectors")->capture_default_str()->excludes(exh);
  ver->add_option("--seed", va.seed, "Random seed")->capture_default_str();
  ver->add_flag("--json", va.json, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? k_ok : k_bad_input;
  }

  try {
    if (*opt) return cmd_optimize(oa);
    if (*emit) return cmd_emit(ea);
    if (*bench) return cmd_bench(ba);
    if (*ver) return cmd_verify(va);
  } catch (const BudgetInfeasible& e) {
    std::cerr << "error: " << e.what() << "\n";
    return k_infeasible;
  } catch (const SpaceTooLarge& e) {
    std::cerr << "error: SpaceTooLarge: " << e.what() << "\n";
    return k_bad_input;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return k_bad_input;
  }
  return k_ok;
}
