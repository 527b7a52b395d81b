#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmvm/dyadic.hpp"
#include "cmvm/matrix.hpp"

namespace cmvm {

/// One non-zero signed digit: sign * 2^power.
struct CsdDigit {
  int power = 0;
  int sign = 1;
  bool operator==(const CsdDigit&) const = default;
};

/// Canonical signed digits of a scalar, ordered from the highest power down.
using CsdScalar = std::vector<CsdDigit>;

/// Canonical signed-digit recoding: no two adjacent non-zero digits and the
/// minimal non-zero digit count among all radix-2 signed-digit forms.
CsdScalar to_csd(const Dyadic& value);
Dyadic from_csd(const CsdScalar& digits);

int nnz_csd(const Dyadic& value);
int nnz_csd(std::span<const Dyadic> values);

/// Row/column power-of-two scaling:
///   original(i, j) == normalized(i, j) * 2^(row_shifts[i] + col_shifts[j])
/// and no row or column of `normalized` has all its non-zero entries even.
struct Normalization {
  std::vector<int> row_shifts;
  std::vector<int> col_shifts;
  Matrix normalized;
};

Normalization normalize(const Matrix& m);

/// A single digit of the expression tensor: `sign * 2^power * L[row]`.
struct Term {
  std::int32_t row = 0;
  std::int32_t power = 0;
  std::int32_t sign = 1;
  bool operator==(const Term&) const = default;
};

/// Sparse signed-digit tensor M_expr[row, col, power] in {-1, 0, +1}.
/// Each column holds its terms sorted by (row, power); at most one term per
/// (row, power) pair.
struct CsdTensor {
  int rows = 0;
  std::vector<std::vector<Term>> columns;

  int cols() const { return static_cast<int>(columns.size()); }
  std::size_t digit_count() const;
  /// Digit at (row, col, power): -1, 0 or +1.
  int at(int row, int col, int power) const;
  /// Lowest and highest stored power; {0, -1} when empty.
  std::pair<int, int> power_range() const;
  /// B = max - min + 1 (0 when empty).
  int band() const;
};

/// CSD expansion of every entry: digit (j, i, p) present iff entry (j, i) has
/// a CSD digit at power p.
CsdTensor matrix_to_tensor(const Matrix& normalized);

} // namespace cmvm
