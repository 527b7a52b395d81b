#pragma once

#include <span>
#include <vector>

#include "cmvm/matrix.hpp"

namespace cmvm {

inline constexpr int k_root = -1;

/// Factorization M = m1 * m2 read off a depth-capped spanning tree over the
/// columns of M, rooted at the zero vector.
///
/// Column i of M is reached from its parent p by v_i = w + sign[i] * v_p,
/// where w is the edge vector stored as column edge_column[i] of m1 (or no
/// column at all when w is zero, i.e. v_i duplicates +-v_p).
struct ColumnGraphResult {
  Matrix m1;                      ///< d_in x k edge vectors
  Matrix m2;                      ///< k x d_out, entries in {-1, 0, +1}
  std::vector<int> parent;        ///< per column; k_root for the root
  std::vector<int> tree_depth;    ///< edges from the root
  std::vector<int> edge_sign;     ///< sign applied to the parent vector
  std::vector<int> edge_column;   ///< m1 column of the incoming edge, or -1
  std::vector<int> edge_weight;   ///< CSD digit count of the edge vector
  std::vector<int> attach_order;  ///< columns in the order Prim attached them
};

/// min(nnz_csd(u + v), nnz_csd(u - v)).
int column_distance(std::span<const Dyadic> u, std::span<const Dyadic> v);

/// Greedy Prim growth from the zero vector. With dc >= 0 no column sits deeper
/// than 2^dc edges below the root; dc = -1 leaves depth unconstrained.
/// `parallel` spreads the distance updates over OpenMP threads; the result is
/// identical either way.
ColumnGraphResult decompose(const Matrix& m, int dc, bool parallel = false);

/// True iff every column hangs directly off the root (m1 is a column
/// permutation of M and m2 a permuted identity, up to zero columns).
bool is_trivial(const ColumnGraphResult& r);

} // namespace cmvm
