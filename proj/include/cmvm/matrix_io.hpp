#pragma once

#include <istream>
#include <stdexcept>
#include <string>

#include "cmvm/matrix.hpp"

namespace cmvm {

class MatrixParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// CSV of decimal literals, one matrix row per line (row j holds the weights of
/// input x_j). Blank lines and lines starting with '#' are skipped. Values that
/// need more than `max_frac_bits` fractional bits, or are not binary
/// fractions at all, are rejected.
Matrix read_matrix_csv(std::istream& in, int max_frac_bits = 32);

/// {"rows": [[entry, ...], ...]} where an entry is an integer or
/// {"mantissa": m, "exp": e}.
Matrix read_matrix_json(const std::string& text);

/// Dispatches on the extension: ".json" is JSON, anything else CSV.
Matrix load_matrix(const std::string& path, int max_frac_bits = 32);

std::string write_matrix_csv(const Matrix& m);
std::string write_matrix_json(const Matrix& m);

} // namespace cmvm
