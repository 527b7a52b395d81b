#include "cmvm/decompose.hpp"

#include <climits>
#include <stdexcept>

#include "cmvm/csd.hpp"

namespace cmvm {

namespace {

// Distance from v to +-u, returning the sign s that realizes
// nnz(v - s * u); ties prefer s = +1.
std::pair<int, int> signed_distance(std::span<const Dyadic> v, std::span<const Dyadic> u) {
  int minus = 0, plus = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    minus += nnz_csd(v[k] - u[k]);
    plus += nnz_csd(v[k] + u[k]);
  }
  return plus < minus ? std::pair{plus, -1} : std::pair{minus, 1};
}

} // namespace

int column_distance(std::span<const Dyadic> u, std::span<const Dyadic> v) {
  if (u.size() != v.size()) throw std::invalid_argument("column_distance: length mismatch");
  return signed_distance(u, v).first;
}

ColumnGraphResult decompose(const Matrix& m, int dc, bool parallel) {
  if (dc < -1) throw std::invalid_argument("delay constraint must be >= -1");
  const int n = static_cast<int>(m.cols());
  const std::size_t d_in = m.rows();
  const int cap = dc < 0 ? INT_MAX : (dc >= 30 ? INT_MAX : 1 << dc);

  std::vector<std::vector<Dyadic>> cols(n);
  for (int i = 0; i < n; ++i) cols[i] = m.column(i);

  ColumnGraphResult r;
  r.parent.assign(n, k_root);
  r.tree_depth.assign(n, 0);
  r.edge_sign.assign(n, 1);
  r.edge_column.assign(n, -1);
  r.edge_weight.assign(n, 0);

  std::vector<int> best_dist(n), best_parent(n, k_root), best_sign(n, 1);
  std::vector<char> attached(n, 0);
  for (int i = 0; i < n; ++i) best_dist[i] = nnz_csd(cols[i]);

  for (int step = 0; step < n; ++step) {
    int pick = -1;
    for (int i = 0; i < n; ++i) {
      if (attached[i]) continue;
      if (pick < 0 || best_dist[i] < best_dist[pick]) pick = i;
    }
    attached[pick] = 1;
    r.attach_order.push_back(pick);
    r.parent[pick] = best_parent[pick];
    r.edge_sign[pick] = best_sign[pick];
    r.edge_weight[pick] = best_dist[pick];
    r.tree_depth[pick] = best_parent[pick] == k_root ? 1 : r.tree_depth[best_parent[pick]] + 1;
    if (r.tree_depth[pick] >= cap) continue;

    const auto& u = cols[pick];
#pragma omp parallel for schedule(static) if (parallel)
    for (int j = 0; j < n; ++j) {
      if (attached[j]) continue;
      const auto [d, s] = signed_distance(cols[j], u);
      if (d < best_dist[j] || (d == best_dist[j] && pick < best_parent[j])) {
        best_dist[j] = d;
        best_parent[j] = pick;
        best_sign[j] = s;
      }
    }
  }

  // Edge vectors w = v - s * v_parent, in attach order.
  std::vector<std::vector<Dyadic>> edges;
  for (int i : r.attach_order) {
    std::vector<Dyadic> w = cols[i];
    if (r.parent[i] != k_root) {
      const auto& p = cols[r.parent[i]];
      for (std::size_t k = 0; k < d_in; ++k) w[k] = r.edge_sign[i] > 0 ? w[k] - p[k] : w[k] + p[k];
    }
    bool zero = true;
    for (const auto& x : w) zero = zero && x.is_zero();
    if (zero) continue;
    r.edge_column[i] = static_cast<int>(edges.size());
    edges.push_back(std::move(w));
  }

  const std::size_t k = edges.size();
  r.m1 = Matrix(d_in, k);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t row = 0; row < d_in; ++row) r.m1(row, c) = edges[c][row];

  // m2 column i = e_{edge(i)} + s_i * (m2 column of parent).
  r.m2 = Matrix(k, n);
  for (int i : r.attach_order) {
    if (r.edge_column[i] >= 0) r.m2(r.edge_column[i], i) = Dyadic(1);
    const int p = r.parent[i];
    if (p == k_root) continue;
    for (std::size_t row = 0; row < k; ++row) {
      const Dyadic& pv = r.m2(row, p);
      if (pv.is_zero()) continue;
      r.m2(row, i) += r.edge_sign[i] > 0 ? pv : -pv;
    }
  }
  return r;
}

bool is_trivial(const ColumnGraphResult& r) {
  for (int p : r.parent)
    if (p != k_root) return false;
  return true;
}

} // namespace cmvm
