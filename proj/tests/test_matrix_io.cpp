#include <random>
#include <sstream>

#include "cmvm/matrix_io.hpp"
#include "doctest.h"

using namespace cmvm;

namespace {

Matrix csv(const std::string& text, int frac = 32) {
  std::istringstream in(text);
  return read_matrix_csv(in, frac);
}

} // namespace

TEST_CASE("csv parsing") {
  const Matrix m = csv("# H.264\n1, 2,1,1\n\n1,1,-1,-2\n  1,-1,-1,2\n1,-2,1,-1\n");
  CHECK(m == Matrix{{1, 2, 1, 1}, {1, 1, -1, -2}, {1, -1, -1, 2}, {1, -2, 1, -1}});
  const Matrix f = csv("0.5,-0.125\n");
  CHECK(f(0, 0) == Dyadic(1, -1));
  CHECK(f(0, 1) == Dyadic(-1, -3));
}

TEST_CASE("csv rejection") {
  CHECK_THROWS_AS(csv(""), MatrixParseError);
  CHECK_THROWS_AS(csv("1,2\n3\n"), MatrixParseError);
  CHECK_THROWS_AS(csv("0.1\n"), MatrixParseError);
  CHECK_THROWS_AS(csv("0.0625\n", 3), MatrixParseError);
  CHECK_THROWS_AS(csv("abc\n"), MatrixParseError);
  CHECK_THROWS_AS(csv("1,,2\n"), MatrixParseError);
}

TEST_CASE("json parsing") {
  const Matrix m = read_matrix_json(R"({"rows": [[1, {"mantissa": 3, "exp": -2}], [-4, 0]]})");
  Matrix want{{1, 0}, {-4, 0}};
  want(0, 1) = Dyadic(3, -2);
  CHECK(m == want);
  CHECK_THROWS_AS(read_matrix_json("{"), MatrixParseError);
  CHECK_THROWS_AS(read_matrix_json(R"({"cols": []})"), MatrixParseError);
  CHECK_THROWS_AS(read_matrix_json(R"({"rows": [[1.5]]})"), MatrixParseError);
  CHECK_THROWS_AS(read_matrix_json(R"({"rows": [[1], [1, 2]]})"), MatrixParseError);
}

TEST_CASE("writers round-trip value-identically") {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m(1 + rng() % 5, 1 + rng() % 5);
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c)
        m(r, c) = Dyadic(std::int64_t(rng() % 2001) - 1000, int(rng() % 13) - 8);
    CHECK(csv(write_matrix_csv(m)) == m);
    CHECK(read_matrix_json(write_matrix_json(m)) == m);
  }
}

TEST_CASE("load_matrix dispatches on extension") {
  const std::string dir = std::string(CMVM_TEST_DIR) + "/data/";
  const Matrix a = load_matrix(dir + "h264.csv");
  const Matrix b = load_matrix(dir + "h264.json");
  CHECK(a == b);
  CHECK_THROWS_AS(load_matrix(dir + "missing.csv"), MatrixParseError);
}
