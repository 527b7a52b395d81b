#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "cmvm/dyadic.hpp"

namespace cmvm {

/// Dense row-major matrix of exact values. A CMVM problem uses it as
/// M[d_in][d_out] with y^T = x^T M, so columns correspond to outputs.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  Matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  Dyadic& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Dyadic& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<Dyadic> column(std::size_t c) const;
  std::span<const Dyadic> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Matrix transposed() const;
  bool operator==(const Matrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Dyadic> data_;
};

/// Exact product a * b.
Matrix operator*(const Matrix& a, const Matrix& b);

/// Exact y^T = x^T M.
std::vector<Dyadic> vecmat(std::span<const Dyadic> x, const Matrix& m);

} // namespace cmvm
