#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "cmvm/csd.hpp"
#include "cmvm/fxp.hpp"
#include "cmvm/graph.hpp"
#include "cmvm/matrix.hpp"

namespace cmvm {

/// Raised when an output cannot be reduced within its depth budget.
class BudgetInfeasible : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// How candidate subexpressions are ranked: by raw frequency, or by frequency
/// times the number of bits the two operands overlap.
enum class Weighting { weighted, unweighted };

/// Two-term subexpression `L[a] + sign * (L[b] << shift)`.
///
/// Canonical form: (a, power of a) precedes (b, power of b) in (row, power)
/// order, so a <= b, and shift > 0 whenever a == b. The shift may be negative
/// when a < b.
struct SubexprKey {
  int a = 0;
  int b = 0;
  int sign = 1;
  int shift = 0;

  bool operator==(const SubexprKey&) const = default;
  /// Tie order: a, then b, then '+' before '-', then shift.
  std::strong_ordering operator<=>(const SubexprKey& o) const;

  std::uint64_t pack() const;
  static SubexprKey unpack(std::uint64_t packed);
};

/// Key of the pair formed by two distinct terms of one column.
SubexprKey pair_key(const Term& x, const Term& y);

/// An entry of L_impl: an input (a < 0) or an implemented subexpression.
struct ImplValue {
  int a = -1;
  int b = -1;
  int sign = 1;
  int shift = 0;
  QInterval qint;
  int depth = 0;

  bool is_input() const { return a < 0; }
};

/// Per-output absolute depth limits; empty means unconstrained.
struct DepthBudget {
  std::vector<int> per_output;

  bool unconstrained() const { return per_output.empty(); }
};

/// Minimal max-depth of a binary combining tree over leaves of the given
/// depths: ceil(log2(sum 2^d)). Returns 0 for no leaves.
int kraft_depth(std::span<const int> leaf_depths);

/// One place where a subexpression can replace two digits.
struct Occurrence {
  int column = 0;
  int power = 0;  // power of the `a` digit
  int sign = 1;   // sign of the `a` digit
};

/// Mutable CSE state: the expression tensor, the implemented values, and the
/// frequency table of every co-occurring digit pair.
class CseState {
public:
  CsdTensor tensor;
  std::vector<ImplValue> impl;
  int num_inputs = 0;
  Weighting weighting = Weighting::weighted;

  /// Current pair count of a key (0 if absent).
  int count(const SubexprKey& key) const;
  /// Overlap-bit weight of a key (1 in unweighted mode).
  std::int64_t weight(const SubexprKey& key) const;
  /// Snapshot of every key with non-zero count, in tie order.
  std::map<SubexprKey, int> frequencies() const;
  std::size_t distinct_keys() const { return freq_.size(); }

  /// Kraft sum of column c: sum over its digits of 2^depth.
  std::int64_t kraft_sum(int column) const { return kraft_.at(column); }

  /// Non-overlapping occurrences of `key`, keeping only those that fit the
  /// budget when applied in column order.
  std::vector<Occurrence> occurrences(const SubexprKey& key, const DepthBudget& budget) const;

  /// Inline hooks for the frequency table; public for the free functions.
  void bump(const SubexprKey& key, int delta);
  void push_candidates();

private:
  struct Entry {
    std::int64_t score;
    int count;
    SubexprKey key;
  };
  struct EntryLess {
    bool operator()(const Entry& x, const Entry& y) const;
  };
  struct Freq {
    int count = 0;
    int bound = 0;  // highest count currently represented in the heap
  };

  void push(const SubexprKey& key, int count);

  std::unordered_map<std::uint64_t, Freq> freq_;
  std::priority_queue<Entry, std::vector<Entry>, EntryLess> heap_;
  std::vector<std::int64_t> kraft_;
  std::vector<int> lsb_, msb_;

  friend CseState init_state(CsdTensor, std::span<const QInterval>, std::span<const int>, Weighting, bool);
  friend std::optional<SubexprKey> select_subexpr(CseState&, const DepthBudget&);
  friend int implement_subexpr(CseState&, const SubexprKey&, const DepthBudget&);
};

/// Serial reference count of all co-occurring digit pairs, keyed by packed
/// SubexprKey.
std::unordered_map<std::uint64_t, int> count_pairs_serial(const CsdTensor& t);
/// OpenMP version: columns are split across threads and the partial tables
/// merged. Produces the same table as the serial count.
std::unordered_map<std::uint64_t, int> count_pairs_parallel(const CsdTensor& t);

/// Start from L_impl = inputs. Digits on rows whose interval is the constant
/// zero are dropped.
CseState init_state(CsdTensor tensor, std::span<const QInterval> qints, std::span<const int> depths,
                    Weighting weighting = Weighting::weighted, bool parallel = false);

/// Highest-ranked key with at least two admissible occurrences, or nothing
/// once CSE is exhausted. Ranking: weighted count, raw count, tie order.
std::optional<SubexprKey> select_subexpr(CseState& state, const DepthBudget& budget = {});

/// Append `key` as a new implemented value and rewrite its admissible
/// occurrences onto the new row. Returns the new row index. Throws
/// std::logic_error if the key has no occurrence.
int implement_subexpr(CseState& state, const SubexprKey& key, const DepthBudget& budget = {});

/// Sum each column's remaining digits into adder trees, always merging the
/// two shallowest terms. `row_signals` maps the first num_inputs rows to graph
/// values; implemented rows are materialized as nodes. Returns one signal per
/// column.
std::vector<Signal> reduce_outputs(const CseState& state, const DepthBudget& budget, GraphBuilder& builder,
                                   std::span<const Signal> row_signals);

/// Standalone variant: builds a fresh graph whose inputs carry the state's
/// input intervals and depths.
AdderGraph reduce_outputs(const CseState& state, const DepthBudget& budget = {});

struct SolveOptions {
  int dc = -1;  ///< extra adder depth allowed over the minimum; -1 = none
  Weighting weighting = Weighting::weighted;
  bool cse = true;            ///< false: plain per-output digit reduction
  bool decompose = true;      ///< run the column-graph stage
  /// Also solve without the column-graph stage and keep whichever graph has
  /// the lower total cost (then fewer adders).
  bool keep_cheaper = true;
  bool parallel = false;      ///< OpenMP in pair counting and decomposition
};

struct Solution {
  AdderGraph graph;
  GraphStats stats;
  double elapsed_ms = 0.0;
};

/// One CSE pass: normalize, recode, eliminate, reduce. Inputs come from
/// `inputs` (signals already in `builder`); returns one signal per column.
std::vector<Signal> run_cse_stage(GraphBuilder& builder, const Matrix& m, std::span<const Signal> inputs,
                                  const DepthBudget& budget, const SolveOptions& options);

/// Per-output budgets min_depth + dc for y^T = x^T m, where min_depth is the
/// Kraft bound over each column's CSD digits. Empty when dc < 0.
DepthBudget output_budgets(const Matrix& m, std::span<const int> input_depths, int dc);

/// CSE only (no decomposition) on a single matrix.
Solution solve_stage2(const Matrix& m, std::span<const QInterval> qints, std::span<const int> depths,
                      const SolveOptions& options = {});

/// Full two-stage optimizer: column-graph decomposition M = M1 M2, then CSE
/// on M1 and on M2 with M1's outputs as its inputs.
Solution solve(const Matrix& m, std::span<const QInterval> qints, std::span<const int> depths,
               const SolveOptions& options = {});

/// Convenience overload: all inputs share `input` and have depth 0.
Solution solve(const Matrix& m, const BitWidthSpec& input, const SolveOptions& options = {});

} // namespace cmvm
