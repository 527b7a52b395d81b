#include "cmvm/cse.hpp"

#include <algorithm>
#include <bit>
#include <chrono>

#include "cmvm/decompose.hpp"

namespace cmvm {

namespace {

constexpr int k_shift_bias = 1 << 14;
constexpr std::int64_t k_kraft_cap = std::int64_t(1) << 62;

// 2^d, saturating. Kraft sums only matter under a depth budget, where depths
// stay far below the cap.
std::int64_t pow2_sat(int d) { return d >= 62 ? k_kraft_cap : std::int64_t(1) << std::max(d, 0); }

bool term_less(const Term& x, const Term& y) { return x.row != y.row ? x.row < y.row : x.power < y.power; }

// Terms of `row` inside a column sorted by (row, power).
std::pair<std::size_t, std::size_t> row_range(const std::vector<Term>& col, int row) {
  auto lo = std::lower_bound(col.begin(), col.end(), row, [](const Term& t, int r) { return t.row < r; });
  auto hi = std::lower_bound(lo, col.end(), row + 1, [](const Term& t, int r) { return t.row < r; });
  return {std::size_t(lo - col.begin()), std::size_t(hi - col.begin())};
}

// Index of the term at (row, power) within [lo, hi), or npos.
std::size_t find_power(const std::vector<Term>& col, std::size_t lo, std::size_t hi, int power) {
  auto first = col.begin() + lo, last = col.begin() + hi;
  auto it = std::lower_bound(first, last, power, [](const Term& t, int p) { return t.power < p; });
  if (it == last || it->power != power) return std::size_t(-1);
  return std::size_t(it - col.begin());
}

void erase_term(std::vector<Term>& col, const Term& t) {
  auto it = std::lower_bound(col.begin(), col.end(), t, term_less);
  if (it == col.end() || it->row != t.row || it->power != t.power)
    throw std::logic_error("cse: term to erase is missing");
  col.erase(it);
}

} // namespace

std::strong_ordering SubexprKey::operator<=>(const SubexprKey& o) const {
  if (auto c = a <=> o.a; c != 0) return c;
  if (auto c = b <=> o.b; c != 0) return c;
  if (auto c = o.sign <=> sign; c != 0) return c;
  return shift <=> o.shift;
}

std::uint64_t SubexprKey::pack() const {
  return (std::uint64_t(a) << 40) | (std::uint64_t(b) << 16) | (std::uint64_t(shift + k_shift_bias) << 1) |
         std::uint64_t(sign < 0);
}

SubexprKey SubexprKey::unpack(std::uint64_t p) {
  SubexprKey k;
  k.a = int(p >> 40);
  k.b = int((p >> 16) & 0xFFFFFF);
  k.shift = int((p >> 1) & 0x7FFF) - k_shift_bias;
  k.sign = (p & 1) ? -1 : 1;
  return k;
}

SubexprKey pair_key(const Term& x, const Term& y) {
  const Term& lo = term_less(x, y) ? x : y;
  const Term& hi = term_less(x, y) ? y : x;
  return {lo.row, hi.row, lo.sign * hi.sign, hi.power - lo.power};
}

int kraft_depth(std::span<const int> leaf_depths) {
  std::int64_t sum = 0;
  for (int d : leaf_depths) sum = std::min(k_kraft_cap, sum + pow2_sat(d));
  if (sum <= 1) return 0;
  return 64 - std::countl_zero(static_cast<std::uint64_t>(sum - 1));
}

// ---------------------------------------------------------------------------
// CseState

int CseState::count(const SubexprKey& key) const {
  auto it = freq_.find(key.pack());
  return it == freq_.end() ? 0 : it->second.count;
}

std::int64_t CseState::weight(const SubexprKey& key) const {
  if (weighting == Weighting::unweighted) return 1;
  const int lo = std::max(lsb_[key.a], lsb_[key.b] + key.shift);
  const int hi = std::min(msb_[key.a], msb_[key.b] + key.shift);
  return std::max(0, hi - lo + 1);
}

std::map<SubexprKey, int> CseState::frequencies() const {
  std::map<SubexprKey, int> out;
  for (const auto& [packed, f] : freq_)
    if (f.count > 0) out.emplace(SubexprKey::unpack(packed), f.count);
  return out;
}

bool CseState::EntryLess::operator()(const Entry& x, const Entry& y) const {
  if (x.score != y.score) return x.score < y.score;
  if (x.count != y.count) return x.count < y.count;
  return y.key < x.key;
}

void CseState::push(const SubexprKey& key, int count) { heap_.push({count * weight(key), count, key}); }

void CseState::bump(const SubexprKey& key, int delta) {
  const std::uint64_t packed = key.pack();
  Freq& f = freq_[packed];
  f.count += delta;
  if (f.count <= 0) {
    freq_.erase(packed);
    return;
  }
  if (delta > 0 && f.count >= 2 && f.count > f.bound) {
    push(key, f.count);
    f.bound = f.count;
  }
}

void CseState::push_candidates() {
  for (auto& [packed, f] : freq_) {
    if (f.count < 2) continue;
    push(SubexprKey::unpack(packed), f.count);
    f.bound = f.count;
  }
}

std::vector<Occurrence> CseState::occurrences(const SubexprKey& key, const DepthBudget& budget) const {
  std::vector<Occurrence> out;
  const bool limited = !budget.unconstrained();
  const int new_depth = std::max(impl[key.a].depth, impl[key.b].depth) + 1;
  const std::int64_t delta = pow2_sat(new_depth) - pow2_sat(impl[key.a].depth) - pow2_sat(impl[key.b].depth);
  std::vector<char> used;
  for (int c = 0; c < tensor.cols(); ++c) {
    const auto& col = tensor.columns[c];
    const auto [a0, a1] = row_range(col, key.a);
    if (a0 == a1) continue;
    const auto [b0, b1] = key.a == key.b ? std::pair{a0, a1} : row_range(col, key.b);
    if (b0 == b1) continue;
    std::int64_t kraft = kraft_[c];
    const std::int64_t limit = limited ? pow2_sat(budget.per_output[c]) : 0;
    used.assign(col.size(), 0);
    for (std::size_t i = a0; i < a1; ++i) {
      if (used[i]) continue;
      const std::size_t j = find_power(col, b0, b1, col[i].power + key.shift);
      if (j == std::size_t(-1) || used[j] || col[j].sign != key.sign * col[i].sign) continue;
      if (limited) {
        if (kraft + delta > limit) continue;
        kraft += delta;
      }
      used[i] = used[j] = 1;
      out.push_back({c, col[i].power, col[i].sign});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pair counting

std::unordered_map<std::uint64_t, int> count_pairs_serial(const CsdTensor& t) {
  std::unordered_map<std::uint64_t, int> counts;
  for (const auto& col : t.columns)
    for (std::size_t i = 0; i < col.size(); ++i)
      for (std::size_t j = i + 1; j < col.size(); ++j) ++counts[pair_key(col[i], col[j]).pack()];
  return counts;
}

std::unordered_map<std::uint64_t, int> count_pairs_parallel(const CsdTensor& t) {
  std::unordered_map<std::uint64_t, int> counts;
  const int cols = t.cols();
#pragma omp parallel
  {
    std::unordered_map<std::uint64_t, int> local;
#pragma omp for schedule(dynamic, 1) nowait
    for (int c = 0; c < cols; ++c) {
      const auto& col = t.columns[c];
      for (std::size_t i = 0; i < col.size(); ++i)
        for (std::size_t j = i + 1; j < col.size(); ++j) ++local[pair_key(col[i], col[j]).pack()];
    }
#pragma omp critical(cmvm_pair_merge)
    for (const auto& [k, v] : local) counts[k] += v;
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Stage-2 operations

CseState init_state(CsdTensor tensor, std::span<const QInterval> qints, std::span<const int> depths,
                    Weighting weighting, bool parallel) {
  if (qints.size() != static_cast<std::size_t>(tensor.rows) || depths.size() != qints.size())
    throw std::invalid_argument("init_state: tensor rows, qints and depths must agree");
  CseState s;
  s.num_inputs = tensor.rows;
  s.weighting = weighting;
  for (auto& col : tensor.columns)
    std::erase_if(col, [&](const Term& t) { return qints[t.row].is_zero(); });
  s.tensor = std::move(tensor);

  for (std::size_t j = 0; j < qints.size(); ++j) {
    ImplValue v;
    v.qint = qints[j];
    v.depth = depths[j];
    s.impl.push_back(v);
    s.lsb_.push_back(qints[j].is_zero() ? 0 : qints[j].lsb());
    s.msb_.push_back(qints[j].is_zero() ? -1 : qints[j].msb());
  }

  auto counts = parallel ? count_pairs_parallel(s.tensor) : count_pairs_serial(s.tensor);
  s.freq_.reserve(counts.size());
  for (const auto& [k, v] : counts) s.freq_[k].count = v;
  s.push_candidates();

  s.kraft_.assign(s.tensor.cols(), 0);
  for (int c = 0; c < s.tensor.cols(); ++c)
    for (const auto& t : s.tensor.columns[c])
      s.kraft_[c] = std::min(k_kraft_cap, s.kraft_[c] + pow2_sat(s.impl[t.row].depth));
  return s;
}

std::optional<SubexprKey> select_subexpr(CseState& s, const DepthBudget& budget) {
  using Entry = CseState::Entry;
  const CseState::EntryLess less;
  std::optional<Entry> best;
  std::vector<Entry> keep;
  while (!s.heap_.empty()) {
    const Entry top = s.heap_.top();
    if (best && !less(*best, top)) break;
    s.heap_.pop();
    auto it = s.freq_.find(top.key.pack());
    if (it == s.freq_.end()) continue;
    CseState::Freq& f = it->second;
    if (f.count != top.count) {
      // Stale upper bound: replace it with the current count.
      if (top.count == f.bound && f.count < top.count) {
        if (f.count >= 2) {
          s.push(top.key, f.count);
          f.bound = f.count;
        } else {
          f.bound = 0;
        }
      }
      continue;
    }
    keep.push_back(top);
    const int n = static_cast<int>(s.occurrences(top.key, budget).size());
    if (n < 2) continue;
    const Entry actual{n * s.weight(top.key), n, top.key};
    if (!best || less(*best, actual)) best = actual;
  }
  for (const auto& e : keep) s.heap_.push(e);
  if (!best) return std::nullopt;
  return best->key;
}

int implement_subexpr(CseState& s, const SubexprKey& key, const DepthBudget& budget) {
  const std::vector<Occurrence> occ = s.occurrences(key, budget);
  if (occ.empty()) throw std::logic_error("implement_subexpr: key has no occurrence");

  const int row = static_cast<int>(s.impl.size());
  ImplValue v;
  v.a = key.a;
  v.b = key.b;
  v.sign = key.sign;
  v.shift = key.shift;
  v.qint = qint_add(s.impl[key.a].qint, s.impl[key.b].qint, key.sign, key.shift);
  v.depth = std::max(s.impl[key.a].depth, s.impl[key.b].depth) + 1;
  const std::int64_t delta = pow2_sat(v.depth) - pow2_sat(s.impl[key.a].depth) - pow2_sat(s.impl[key.b].depth);
  s.impl.push_back(v);
  s.lsb_.push_back(v.qint.is_zero() ? 0 : v.qint.lsb());
  s.msb_.push_back(v.qint.is_zero() ? -1 : v.qint.msb());
  ++s.tensor.rows;

  for (const Occurrence& o : occ) {
    auto& col = s.tensor.columns[o.column];
    const Term ta{key.a, o.power, o.sign};
    const Term tb{key.b, o.power + key.shift, key.sign * o.sign};
    for (const Term& t : col) {
      if ((t.row == ta.row && t.power == ta.power) || (t.row == tb.row && t.power == tb.power)) continue;
      s.bump(pair_key(ta, t), -1);
      s.bump(pair_key(tb, t), -1);
    }
    s.bump(pair_key(ta, tb), -1);
    erase_term(col, ta);
    erase_term(col, tb);

    const Term tn{row, o.power, o.sign};
    for (const Term& t : col) s.bump(pair_key(tn, t), +1);
    col.insert(std::upper_bound(col.begin(), col.end(), tn, term_less), tn);
    s.kraft_[o.column] = std::min(k_kraft_cap, s.kraft_[o.column] + delta);
  }
  return row;
}

std::vector<Signal> reduce_outputs(const CseState& s, const DepthBudget& budget, GraphBuilder& builder,
                                   std::span<const Signal> row_signals) {
  if (row_signals.size() != static_cast<std::size_t>(s.num_inputs))
    throw std::invalid_argument("reduce_outputs: one signal per input row required");
  std::vector<Signal> sig(s.impl.size());
  std::copy(row_signals.begin(), row_signals.end(), sig.begin());
  for (std::size_t r = s.num_inputs; r < s.impl.size(); ++r) {
    const ImplValue& v = s.impl[r];
    sig[r] = builder.add(sig[v.a], sig[v.b], v.sign, v.shift);
  }

  struct Item {
    Signal sig;
    int depth;
    int width;
    int seq;
  };
  auto later = [](const Item& x, const Item& y) {
    if (x.depth != y.depth) return x.depth > y.depth;
    if (x.width != y.width) return x.width > y.width;
    return x.seq > y.seq;
  };
  auto make_item = [&](const Signal& sg, int seq) {
    return Item{sg, builder.depth(sg), bitwidth_spec(builder.qint(sg)).width, seq};
  };

  std::vector<Signal> outputs(s.tensor.cols());
  for (int c = 0; c < s.tensor.cols(); ++c) {
    std::vector<Item> heap;
    int seq = 0;
    for (const Term& t : s.tensor.columns[c]) {
      Signal sg = sig[t.row];
      if (sg.is_zero()) continue;
      sg.shift += t.power;
      sg.sign *= t.sign;
      heap.push_back(make_item(sg, seq++));
    }
    std::make_heap(heap.begin(), heap.end(), later);
    while (heap.size() > 1) {
      std::pop_heap(heap.begin(), heap.end(), later);
      Item x = heap.back();
      heap.pop_back();
      std::pop_heap(heap.begin(), heap.end(), later);
      Item y = heap.back();
      heap.pop_back();
      // Lead with a positive operand so negations stay inside the adders.
      if (x.sig.sign < 0 && y.sig.sign > 0) std::swap(x, y);
      heap.push_back(make_item(builder.add(x.sig, y.sig, 1, 0), seq++));
      std::push_heap(heap.begin(), heap.end(), later);
    }
    if (heap.empty()) continue;
    outputs[c] = heap.front().sig;
    if (!budget.unconstrained() && heap.front().depth > budget.per_output[c])
      throw BudgetInfeasible("output " + std::to_string(c) + " needs depth " + std::to_string(heap.front().depth) +
                             " but its budget is " + std::to_string(budget.per_output[c]));
  }
  return outputs;
}

namespace {

AdderGraph finish_graph(GraphBuilder& builder, std::span<const Signal> outs) {
  AdderGraph g = builder.release();
  g.outputs.clear();
  for (const Signal& o : outs) g.outputs.push_back(o.is_zero() ? OutputRef{} : OutputRef{o.node, o.shift, o.sign});
  return prune_dead(g);
}

std::vector<Signal> add_inputs(GraphBuilder& builder, std::span<const QInterval> qints, std::span<const int> depths) {
  if (qints.size() != depths.size()) throw std::invalid_argument("one depth per input interval required");
  std::vector<Signal> sigs;
  for (std::size_t j = 0; j < qints.size(); ++j) sigs.push_back({builder.add_input(qints[j], depths[j]), 0, 1});
  return sigs;
}

} // namespace

AdderGraph reduce_outputs(const CseState& s, const DepthBudget& budget) {
  GraphBuilder builder;
  std::vector<Signal> sigs;
  for (int r = 0; r < s.num_inputs; ++r) sigs.push_back({builder.add_input(s.impl[r].qint, s.impl[r].depth), 0, 1});
  const auto outs = reduce_outputs(s, budget, builder, sigs);
  return finish_graph(builder, outs);
}

std::vector<Signal> run_cse_stage(GraphBuilder& builder, const Matrix& m, std::span<const Signal> inputs,
                                  const DepthBudget& budget, const SolveOptions& options) {
  if (inputs.size() != m.rows()) throw std::invalid_argument("run_cse_stage: one input signal per matrix row");
  const Normalization norm = normalize(m);
  std::vector<Signal> rows(inputs.begin(), inputs.end());
  std::vector<QInterval> qints;
  std::vector<int> depths;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (!rows[j].is_zero()) rows[j].shift += norm.row_shifts[j];
    qints.push_back(builder.qint(rows[j]));
    depths.push_back(builder.depth(rows[j]));
  }
  CseState state = init_state(matrix_to_tensor(norm.normalized), qints, depths, options.weighting, options.parallel);
  if (options.cse)
    while (auto key = select_subexpr(state, budget)) implement_subexpr(state, *key, budget);
  std::vector<Signal> outs = reduce_outputs(state, budget, builder, rows);
  for (std::size_t i = 0; i < outs.size(); ++i)
    if (!outs[i].is_zero()) outs[i].shift += norm.col_shifts[i];
  return outs;
}

DepthBudget output_budgets(const Matrix& m, std::span<const int> input_depths, int dc) {
  DepthBudget b;
  if (dc < 0) return b;
  if (input_depths.size() != m.rows()) throw std::invalid_argument("output_budgets: one depth per input");
  std::vector<int> leaves;
  for (std::size_t i = 0; i < m.cols(); ++i) {
    leaves.clear();
    for (std::size_t j = 0; j < m.rows(); ++j) leaves.insert(leaves.end(), nnz_csd(m(j, i)), input_depths[j]);
    b.per_output.push_back(kraft_depth(leaves) + dc);
  }
  return b;
}

Solution solve_stage2(const Matrix& m, std::span<const QInterval> qints, std::span<const int> depths,
                      const SolveOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  GraphBuilder builder;
  const auto inputs = add_inputs(builder, qints, depths);
  const auto outs = run_cse_stage(builder, m, inputs, output_budgets(m, depths, options.dc), options);
  Solution sol;
  sol.graph = finish_graph(builder, outs);
  sol.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  sol.stats = stats(sol.graph);
  return sol;
}

namespace {

// Budgets for the M1 pass such that, for every output i, the Kraft sum of the
// M1 values on its tree path fits 2^budget_i. Empty optional when some M1
// column cannot meet its share.
std::optional<DepthBudget> split_budget(const ColumnGraphResult& dec, const DepthBudget& outer,
                                        std::span<const int> input_depths) {
  const std::size_t k = dec.m1.cols();
  const std::size_t n = dec.m2.cols();
  std::vector<int> share(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int path = 0;
    for (std::size_t e = 0; e < k; ++e) path += !dec.m2(e, i).is_zero();
    const int spread = path <= 1 ? 0 : 64 - std::countl_zero(static_cast<std::uint64_t>(path - 1));
    share[i] = outer.per_output[i] - spread;
  }
  const DepthBudget own = output_budgets(dec.m1, input_depths, 0);
  DepthBudget b;
  b.per_output.assign(k, 0);
  for (std::size_t e = 0; e < k; ++e) {
    int limit = INT32_MAX;
    for (std::size_t i = 0; i < n; ++i)
      if (!dec.m2(e, i).is_zero()) limit = std::min(limit, share[i]);
    if (limit < own.per_output[e]) return std::nullopt;
    b.per_output[e] = limit;
  }
  return b;
}

} // namespace

Solution solve(const Matrix& m, std::span<const QInterval> qints, std::span<const int> depths,
               const SolveOptions& options) {
  if (qints.size() != m.rows()) throw std::invalid_argument("solve: one input interval per matrix row");
  if (options.dc < -1) throw std::invalid_argument("solve: delay constraint must be >= -1");
  const auto t0 = std::chrono::steady_clock::now();
  const Normalization norm = normalize(m);
  const Matrix& mn = norm.normalized;
  const DepthBudget budget = output_budgets(mn, depths, options.dc);

  // One full graph, through M1 M2 when `dec` is given and its budgets fit.
  auto build = [&](const ColumnGraphResult* dec) -> std::optional<AdderGraph> {
    GraphBuilder builder;
    std::vector<Signal> inputs = add_inputs(builder, qints, depths);
    for (std::size_t j = 0; j < inputs.size(); ++j) inputs[j].shift += norm.row_shifts[j];
    std::vector<Signal> outs;
    if (dec) {
      std::optional<DepthBudget> inner = DepthBudget{};
      if (!budget.unconstrained()) inner = split_budget(*dec, budget, depths);
      if (!inner) return std::nullopt;
      const auto mids = run_cse_stage(builder, dec->m1, inputs, *inner, options);
      outs = run_cse_stage(builder, dec->m2, mids, budget, options);
    } else {
      outs = run_cse_stage(builder, mn, inputs, budget, options);
    }
    for (std::size_t i = 0; i < outs.size(); ++i)
      if (!outs[i].is_zero()) outs[i].shift += norm.col_shifts[i];
    return finish_graph(builder, outs);
  };

  std::optional<AdderGraph> best;
  if (options.decompose && m.cols() > 1) {
    const ColumnGraphResult dec = decompose(mn, options.dc, options.parallel);
    if (!is_trivial(dec)) best = build(&dec);
  }
  if (!best) {
    best = build(nullptr);
  } else if (options.keep_cheaper) {
    AdderGraph plain = *build(nullptr);
    const GraphStats a = stats(*best), b = stats(plain);
    if (b.cost < a.cost || (b.cost == a.cost && b.adders < a.adders)) best = std::move(plain);
  }

  Solution sol;
  sol.graph = std::move(*best);
  sol.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  sol.stats = stats(sol.graph);
  return sol;
}


Solution solve(const Matrix& m, const BitWidthSpec& input, const SolveOptions& options) {
  const std::vector<QInterval> qints(m.rows(), qint_from_fixed(input));
  const std::vector<int> depths(m.rows(), 0);
  return solve(m, qints, depths, options);
}

} // namespace cmvm
