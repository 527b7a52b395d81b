#include "cmvm/matrix_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cmvm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Matrix from_rows(const std::vector<std::vector<Dyadic>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      throw MatrixParseError("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                             " entries, expected " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

} // namespace

Matrix read_matrix_csv(std::istream& in, int max_frac_bits) {
  std::vector<std::vector<Dyadic>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<Dyadic> row;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(Dyadic::parse_decimal(trim(cell), max_frac_bits));
      } catch (const std::exception& e) {
        throw MatrixParseError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw MatrixParseError("matrix file has no rows");
  return from_rows(rows);
}

Matrix read_matrix_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<std::vector<Dyadic>> rows;
    for (const auto& jr : j.at("rows")) {
      std::vector<Dyadic> row;
      for (const auto& e : jr) {
        if (e.is_number_integer())
          row.push_back(Dyadic(e.get<std::int64_t>()));
        else
          row.push_back(Dyadic(e.at("mantissa").get<std::int64_t>(), e.at("exp").get<int>()));
      }
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw MatrixParseError("matrix file has no rows");
    return from_rows(rows);
  } catch (const nlohmann::json::exception& e) {
    throw MatrixParseError(e.what());
  } catch (const std::overflow_error& e) {
    throw MatrixParseError(e.what());
  }
}

Matrix load_matrix(const std::string& path, int max_frac_bits) {
  std::ifstream in(path);
  if (!in) throw MatrixParseError("cannot open " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    std::stringstream ss;
    ss << in.rdbuf();
    return read_matrix_json(ss.str());
  }
  return read_matrix_csv(in, max_frac_bits);
}

std::string write_matrix_csv(const Matrix& m) {
  std::string out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out += (c ? "," : "") + m(r, c).to_string();
    out += "\n";
  }
  return out;
}

std::string write_matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < m.cols(); ++c)
      row.push_back({{"mantissa", m(r, c).mantissa()}, {"exp", m(r, c).exponent()}});
    rows.push_back(row);
  }
  return nlohmann::json{{"rows", rows}}.dump() + "\n";
}

} // namespace cmvm
