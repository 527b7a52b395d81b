#include "cmvm/csd.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>

namespace cmvm {

Matrix::Matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged matrix literal");
    for (std::int64_t v : r) data_.emplace_back(v);
  }
}

std::vector<Dyadic> Matrix::column(std::size_t c) const {
  std::vector<Dyadic> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k).is_zero()) continue;
      for (std::size_t j = 0; j < b.cols(); ++j)
        if (!b(k, j).is_zero()) out(i, j) += a(i, k) * b(k, j);
    }
  return out;
}

std::vector<Dyadic> vecmat(std::span<const Dyadic> x, const Matrix& m) {
  if (x.size() != m.rows()) throw std::invalid_argument("vecmat: dimension mismatch");
  std::vector<Dyadic> y(m.cols());
  for (std::size_t j = 0; j < m.rows(); ++j) {
    if (x[j].is_zero()) continue;
    for (std::size_t i = 0; i < m.cols(); ++i)
      if (!m(j, i).is_zero()) y[i] += x[j] * m(j, i);
  }
  return y;
}

CsdScalar to_csd(const Dyadic& value) {
  CsdScalar digits;
  if (value.is_zero()) return digits;
  const std::int64_t m = value.mantissa();
  const int neg = m < 0 ? -1 : 1;
  std::uint64_t u = m < 0 ? 0 - static_cast<std::uint64_t>(m) : static_cast<std::uint64_t>(m);
  // Non-adjacent form, least significant digit first. u + 1 cannot wrap since
  // |mantissa| <= 2^63.
  int power = value.exponent();
  while (u != 0) {
    if (u & 1) {
      const int d = (u & 3) == 1 ? 1 : -1;
      digits.push_back({power, d * neg});
      u = d > 0 ? u - 1 : u + 1;
    }
    u >>= 1;
    ++power;
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

Dyadic from_csd(const CsdScalar& digits) {
  Dyadic v;
  for (const auto& d : digits) v += Dyadic(d.sign, d.power);
  return v;
}

int nnz_csd(const Dyadic& value) {
  if (value.is_zero()) return 0;
  // NAF weight is popcount((3u ^ u) >> 1); 128 bits so 3u cannot overflow.
  const std::int64_t m = value.mantissa();
  const unsigned __int128 u = m < 0 ? static_cast<unsigned __int128>(0 - static_cast<std::uint64_t>(m))
                                    : static_cast<unsigned __int128>(m);
  const unsigned __int128 x = ((u * 3) ^ u) >> 1;
  const auto lo = static_cast<std::uint64_t>(x);
  const auto hi = static_cast<std::uint64_t>(x >> 64);
  return __builtin_popcountll(lo) + __builtin_popcountll(hi);
}

int nnz_csd(std::span<const Dyadic> values) {
  int total = 0;
  for (const auto& v : values) total += nnz_csd(v);
  return total;
}

namespace {

// Exponent of the largest power of two dividing every non-zero entry.
template <class Get>
std::optional<int> common_valuation(std::size_t n, Get get) {
  std::optional<int> best;
  for (std::size_t k = 0; k < n; ++k) {
    const Dyadic& v = get(k);
    if (v.is_zero()) continue;
    best = best ? std::min(*best, v.exponent()) : v.exponent();
  }
  return best;
}

} // namespace

Normalization normalize(const Matrix& m) {
  Normalization out{std::vector<int>(m.rows(), 0), std::vector<int>(m.cols(), 0), m};
  Matrix& n = out.normalized;
  for (std::size_t r = 0; r < n.rows(); ++r) {
    const auto v = common_valuation(n.cols(), [&](std::size_t c) -> const Dyadic& { return n(r, c); });
    if (!v || *v == 0) continue;
    out.row_shifts[r] = *v;
    for (std::size_t c = 0; c < n.cols(); ++c) n(r, c) = n(r, c).shifted(-*v);
  }
  for (std::size_t c = 0; c < n.cols(); ++c) {
    const auto v = common_valuation(n.rows(), [&](std::size_t r) -> const Dyadic& { return n(r, c); });
    if (!v || *v == 0) continue;
    out.col_shifts[c] = *v;
    for (std::size_t r = 0; r < n.rows(); ++r) n(r, c) = n(r, c).shifted(-*v);
  }
  return out;
}

std::size_t CsdTensor::digit_count() const {
  std::size_t n = 0;
  for (const auto& col : columns) n += col.size();
  return n;
}

int CsdTensor::at(int row, int col, int power) const {
  const auto& terms = columns.at(col);
  const Term probe{row, power, 0};
  auto it = std::lower_bound(terms.begin(), terms.end(), probe, [](const Term& a, const Term& b) {
    return a.row != b.row ? a.row < b.row : a.power < b.power;
  });
  if (it == terms.end() || it->row != row || it->power != power) return 0;
  return it->sign;
}

std::pair<int, int> CsdTensor::power_range() const {
  int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
  for (const auto& col : columns)
    for (const auto& t : col) {
      lo = std::min(lo, t.power);
      hi = std::max(hi, t.power);
    }
  if (lo > hi) return {0, -1};
  return {lo, hi};
}

int CsdTensor::band() const {
  const auto [lo, hi] = power_range();
  return hi - lo + 1;
}

CsdTensor matrix_to_tensor(const Matrix& normalized) {
  CsdTensor t;
  t.rows = static_cast<int>(normalized.rows());
  t.columns.resize(normalized.cols());
  for (std::size_t c = 0; c < normalized.cols(); ++c) {
    auto& col = t.columns[c];
    for (std::size_t r = 0; r < normalized.rows(); ++r) {
      const CsdScalar digits = to_csd(normalized(r, c));
      // to_csd is high-to-low; terms are kept ascending by power within a row.
      for (auto it = digits.rbegin(); it != digits.rend(); ++it)
        col.push_back({static_cast<std::int32_t>(r), it->power, it->sign});
    }
  }
  return t;
}

} // namespace cmvm
