#include "cmvm/verify.hpp"

#include <algorithm>
#include <climits>
#include <sstream>

#include "json.hpp"

namespace cmvm {

namespace {

using i128 = __int128;
constexpr std::uint64_t k_golden = 0x9E3779B97F4A7C15ull;

int bit_length(std::uint64_t v) { return v == 0 ? 0 : 64 - __builtin_clzll(v); }

std::uint64_t magnitude(std::int64_t v) { return v < 0 ? std::uint64_t(0) - std::uint64_t(v) : std::uint64_t(v); }

Dyadic from_units(i128 v, int exp) {
  while (v != 0 && (v & 1) == 0) {
    v >>= 1;
    ++exp;
  }
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("verify: value does not fit 64 bits");
  return Dyadic(static_cast<std::int64_t>(v), exp);
}

// Everything needed to evaluate the graph and the oracle in integer units.
struct Plan {
  int e = 0;        // node values are integers in units of 2^e
  int e_out = 0;    // comparison exponent
  int m_exp = 0;    // matrix entries are integers in units of 2^m_exp
  std::size_t d_in = 0, d_out = 0;
  std::vector<std::int64_t> node_lo, node_hi, node_mask;
  std::vector<std::int64_t> in_lo, in_stride;
  std::vector<std::uint64_t> in_count;
  std::vector<int> out_scale;           // left shift of node units into e_out units
  std::vector<std::int64_t> m_units;    // row-major d_in x d_out
  int oracle_scale = 0;
};

Plan make_plan(const AdderGraph& g, const Matrix& m) {
  Plan p;
  p.d_in = m.rows();
  p.d_out = m.cols();
  if (static_cast<std::size_t>(g.num_inputs()) != p.d_in || g.outputs.size() != p.d_out)
    throw std::invalid_argument("verify: graph shape does not match the matrix");

  bool any = false;
  for (const auto& n : g.nodes) {
    p.e = any ? std::min(p.e, n.qint.step_exp) : n.qint.step_exp;
    any = true;
  }
  for (const auto& n : g.nodes) {
    const std::int64_t lo = n.qint.low.to_units(p.e), hi = n.qint.high.to_units(p.e);
    if (std::max(bit_length(magnitude(lo)), bit_length(magnitude(hi))) > 60)
      throw std::overflow_error("verify: node range too wide for 64-bit evaluation");
    p.node_lo.push_back(lo);
    p.node_hi.push_back(hi);
    const int gap = n.qint.step_exp - p.e;
    p.node_mask.push_back(gap >= 62 ? INT64_MAX : (std::int64_t(1) << gap) - 1);
  }

  p.in_lo.assign(p.d_in, 0);
  p.in_stride.assign(p.d_in, 1);
  p.in_count.assign(p.d_in, 1);
  int in_bits = 0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const Node& n = g.nodes[i];
    if (n.kind != NodeKind::input) continue;
    const int j = n.input_index;
    p.in_lo[j] = p.node_lo[i];
    p.in_stride[j] = std::int64_t(1) << (n.qint.step_exp - p.e);
    p.in_count[j] = std::uint64_t((p.node_hi[i] - p.node_lo[i]) / p.in_stride[j]) + 1;
    in_bits = std::max({in_bits, bit_length(magnitude(p.node_lo[i])), bit_length(magnitude(p.node_hi[i]))});
  }

  any = false;
  for (std::size_t r = 0; r < p.d_in; ++r)
    for (std::size_t c = 0; c < p.d_out; ++c) {
      const Dyadic& v = m(r, c);
      if (v.is_zero()) continue;
      p.m_exp = any ? std::min(p.m_exp, v.exponent()) : v.exponent();
      any = true;
    }
  int m_bits = 0;
  p.m_units.resize(p.d_in * p.d_out);
  for (std::size_t r = 0; r < p.d_in; ++r)
    for (std::size_t c = 0; c < p.d_out; ++c) {
      const std::int64_t u = m(r, c).to_units(p.m_exp);
      p.m_units[r * p.d_out + c] = u;
      m_bits = std::max(m_bits, bit_length(magnitude(u)));
    }

  p.e_out = p.e + p.m_exp;
  for (const auto& o : g.outputs)
    if (!o.is_zero()) p.e_out = std::min(p.e_out, p.e + o.shift);
  int widest = 0;
  for (const auto& o : g.outputs) {
    const int scale = o.is_zero() ? 0 : p.e + o.shift - p.e_out;
    p.out_scale.push_back(scale);
    if (!o.is_zero())
      widest = std::max({widest, bit_length(magnitude(p.node_lo[o.node])) + scale,
                         bit_length(magnitude(p.node_hi[o.node])) + scale});
  }
  p.oracle_scale = p.e + p.m_exp - p.e_out;
  widest = std::max(widest, in_bits + m_bits + bit_length(p.d_in) + p.oracle_scale);
  if (widest > 125) throw std::overflow_error("verify: outputs too wide for 128-bit comparison");
  return p;
}

struct Acc {
  std::uint64_t vectors = 0;
  std::uint64_t mismatch_index = UINT64_MAX;
  std::vector<std::int64_t> x;
  std::vector<i128> expected, got;
  std::vector<char> violation;
  std::vector<std::int64_t> lo, hi;
};

void run_vector(const AdderGraph& g, const Plan& p, std::uint64_t index, const std::vector<std::int64_t>& x,
                std::vector<std::int64_t>& value, std::vector<i128>& y, std::vector<i128>& ref, Acc& acc) {
  const std::size_t n = g.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = g.nodes[i];
    std::int64_t v;
    if (node.kind == NodeKind::input) {
      v = x[node.input_index];
    } else {
      std::int64_t b = value[node.b];
      if (node.shift >= 0) {
        b = static_cast<std::int64_t>(static_cast<std::uint64_t>(b) << node.shift);
      } else {
        if (b & ((std::int64_t(1) << -node.shift) - 1)) acc.violation[i] = 1;
        b >>= -node.shift;
      }
      v = node.sign > 0 ? value[node.a] + b : value[node.a] - b;
    }
    value[i] = v;
    if (v < p.node_lo[i] || v > p.node_hi[i] || ((v - p.node_lo[i]) & p.node_mask[i])) acc.violation[i] = 1;
    acc.lo[i] = std::min(acc.lo[i], v);
    acc.hi[i] = std::max(acc.hi[i], v);
  }
  for (std::size_t c = 0; c < p.d_out; ++c) {
    const OutputRef& o = g.outputs[c];
    if (o.is_zero()) {
      y[c] = 0;
      continue;
    }
    const i128 v = i128(value[o.node]) << p.out_scale[c];
    y[c] = o.sign < 0 ? -v : v;
  }
  std::fill(ref.begin(), ref.end(), 0);
  for (std::size_t r = 0; r < p.d_in; ++r) {
    if (x[r] == 0) continue;
    const std::int64_t* row = &p.m_units[r * p.d_out];
    for (std::size_t c = 0; c < p.d_out; ++c) ref[c] += i128(x[r]) * row[c];
  }
  for (auto& v : ref) v <<= p.oracle_scale;
  ++acc.vectors;
  if (index < acc.mismatch_index && y != ref) {
    acc.mismatch_index = index;
    acc.x = x;
    acc.expected = ref;
    acc.got = y;
  }
}

template <class Fill>
Acc sweep(const AdderGraph& g, const Plan& p, std::uint64_t total, bool parallel, Fill fill) {
  const std::size_t n = g.nodes.size();
  Acc result;
  result.violation.assign(n, 0);
  result.lo.assign(n, INT64_MAX);
  result.hi.assign(n, INT64_MIN);
#pragma omp parallel if (parallel)
  {
    Acc acc;
    acc.violation.assign(n, 0);
    acc.lo.assign(n, INT64_MAX);
    acc.hi.assign(n, INT64_MIN);
    std::vector<std::int64_t> x(p.d_in), value(n);
    std::vector<i128> y(p.d_out), ref(p.d_out);
#pragma omp for schedule(static)
    for (std::uint64_t t = 0; t < total; ++t) {
      fill(t, x);
      run_vector(g, p, t, x, value, y, ref, acc);
    }
#pragma omp critical(cmvm_verify_merge)
    {
      result.vectors += acc.vectors;
      for (std::size_t i = 0; i < n; ++i) {
        result.violation[i] |= acc.violation[i];
        result.lo[i] = std::min(result.lo[i], acc.lo[i]);
        result.hi[i] = std::max(result.hi[i], acc.hi[i]);
      }
      if (acc.mismatch_index < result.mismatch_index) {
        result.mismatch_index = acc.mismatch_index;
        result.x = std::move(acc.x);
        result.expected = std::move(acc.expected);
        result.got = std::move(acc.got);
      }
    }
  }
  return result;
}

Report make_report(const std::string& mode, const Plan& p, const Acc& acc) {
  Report r;
  r.mode = mode;
  r.vectors = acc.vectors;
  for (std::size_t i = 0; i < acc.violation.size(); ++i)
    if (acc.violation[i]) r.interval_violations.push_back(static_cast<int>(i));
  if (acc.vectors > 0) {
    for (std::size_t i = 0; i < acc.lo.size(); ++i) {
      r.observed_low.push_back(from_units(acc.lo[i], p.e));
      r.observed_high.push_back(from_units(acc.hi[i], p.e));
    }
  }
  if (acc.mismatch_index != UINT64_MAX) {
    Mismatch mm;
    mm.index = acc.mismatch_index;
    for (auto v : acc.x) mm.x.push_back(from_units(v, p.e));
    for (auto v : acc.expected) mm.expected.push_back(from_units(v, p.e_out));
    for (auto v : acc.got) mm.got.push_back(from_units(v, p.e_out));
    r.mismatch = std::move(mm);
  }
  return r;
}

std::string join(const std::vector<Dyadic>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].to_string();
  return s + ")";
}

nlohmann::json strings(const std::vector<Dyadic>& v) {
  auto a = nlohmann::json::array();
  for (const auto& d : v) a.push_back(d.to_string());
  return a;
}

} // namespace

std::vector<Dyadic> oracle(const Matrix& m, std::span<const Dyadic> x) { return vecmat(x, m); }

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += k_golden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t input_space_size(const AdderGraph& g) {
  std::uint64_t total = 1;
  for (const auto& n : g.nodes) {
    if (n.kind != NodeKind::input) continue;
    const Dyadic span = n.qint.high - n.qint.low;
    const std::uint64_t count = std::uint64_t(span.to_units(n.qint.step_exp)) + 1;
    if (total > UINT64_MAX / count) return UINT64_MAX;
    total *= count;
  }
  return total;
}

Report check_exhaustive(const AdderGraph& g, const Matrix& m, const VerifyOptions& options) {
  const Plan p = make_plan(g, m);
  const std::uint64_t total = input_space_size(g);
  if (total > options.limit)
    throw SpaceTooLarge("input space has " + (total == UINT64_MAX ? std::string("more than 2^64") : std::to_string(total)) +
                        " vectors; the exhaustive limit is " + std::to_string(options.limit));
  // Mixed-radix enumeration with input 0 varying fastest.
  auto fill = [&](std::uint64_t t, std::vector<std::int64_t>& x) {
    for (std::size_t j = 0; j < p.d_in; ++j) {
      x[j] = p.in_lo[j] + std::int64_t(t % p.in_count[j]) * p.in_stride[j];
      t /= p.in_count[j];
    }
  };
  return make_report("exhaustive", p, sweep(g, p, total, options.parallel, fill));
}

Report check_random(const AdderGraph& g, const Matrix& m, std::uint64_t trials, std::uint64_t seed,
                    const VerifyOptions& options) {
  const Plan p = make_plan(g, m);
  auto fill = [&](std::uint64_t t, std::vector<std::int64_t>& x) {
    SplitMix64 rng(seed + (t + 1) * k_golden);
    for (std::size_t j = 0; j < p.d_in; ++j) {
      const auto k = static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng.next()) * p.in_count[j]) >> 64);
      x[j] = p.in_lo[j] + std::int64_t(k) * p.in_stride[j];
    }
  };
  return make_report("random", p, sweep(g, p, trials, options.parallel, fill));
}

std::vector<int> tight_outputs(const AdderGraph& g, const Report& r) {
  std::vector<int> out;
  if (r.observed_low.size() != g.nodes.size()) return out;
  for (std::size_t i = 0; i < g.outputs.size(); ++i) {
    const OutputRef& o = g.outputs[i];
    if (o.is_zero()) continue;
    const QInterval& q = g.nodes[o.node].qint;
    if (r.observed_low[o.node] == q.low && r.observed_high[o.node] == q.high) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::string Report::text() const {
  std::ostringstream os;
  os << "mode: " << mode << "\n";
  os << "vectors: " << vectors << "\n";
  if (mismatch) {
    os << "result: MISMATCH at vector " << mismatch->index << "\n";
    os << "  x = " << join(mismatch->x) << "\n";
    os << "  expected = " << join(mismatch->expected) << "\n";
    os << "  got = " << join(mismatch->got) << "\n";
  } else {
    os << "result: " << (equivalent() ? "equivalent" : "outputs match") << "\n";
  }
  os << "interval violations: ";
  if (interval_violations.empty()) os << "none";
  for (std::size_t i = 0; i < interval_violations.size(); ++i) os << (i ? ", " : "node ") << interval_violations[i];
  os << "\n";
  return os.str();
}

std::string Report::json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["vectors"] = vectors;
  j["equivalent"] = equivalent();
  if (mismatch)
    j["mismatch"] = {{"index", mismatch->index},
                     {"x", strings(mismatch->x)},
                     {"expected", strings(mismatch->expected)},
                     {"got", strings(mismatch->got)}};
  else
    j["mismatch"] = nullptr;
  j["interval_violations"] = interval_violations;
  return j.dump(2);
}

} // namespace cmvm
