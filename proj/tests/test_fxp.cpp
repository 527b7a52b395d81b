#include <random>
#include <stdexcept>

#include "cmvm/fxp.hpp"
#include "doctest.h"

using namespace cmvm;

namespace {

QInterval qi(std::int64_t lo, std::int64_t hi, int step_exp = 0) {
  return {Dyadic(lo, step_exp), Dyadic(hi, step_exp), step_exp};
}

// Signed interval of a `bits`-wide integer.
QInterval sint(int bits) { return qint_from_fixed({true, bits, bits}); }

} // namespace

TEST_CASE("dyadic arithmetic is exact and normalized") {
  CHECK(Dyadic(12) == Dyadic(3, 2));
  CHECK(Dyadic(12).mantissa() == 3);
  CHECK(Dyadic(12).exponent() == 2);
  CHECK(Dyadic(0, 7) == Dyadic());
  CHECK(Dyadic(3, -2) + Dyadic(1, -1) == Dyadic(5, -2));
  CHECK(Dyadic(3, -2) * Dyadic(-6) == Dyadic(-9, -1));
  CHECK(Dyadic(5).shifted(-3) == Dyadic(5, -3));
  CHECK(Dyadic(-3, -1) < Dyadic(-1));
  CHECK(Dyadic(7, -3).to_string() == "0.875");
  CHECK(Dyadic(-11, -1).to_string() == "-5.5");
  CHECK(Dyadic(3, 4).to_units(2) == 12);
  CHECK_THROWS_AS(Dyadic(3, -1).to_units(0), std::domain_error);
  CHECK_THROWS_AS(Dyadic(INT64_MAX) + Dyadic(2), std::overflow_error);
  CHECK(Dyadic(INT64_MAX) + Dyadic(INT64_MAX) == Dyadic(INT64_MAX, 1));
}

TEST_CASE("decimal parsing accepts binary fractions only") {
  CHECK(Dyadic::parse_decimal("-0.375") == Dyadic(-3, -3));
  CHECK(Dyadic::parse_decimal("+12") == Dyadic(12));
  CHECK(Dyadic::parse_decimal("2.50") == Dyadic(5, -1));
  CHECK_THROWS_AS(Dyadic::parse_decimal("0.1"), std::invalid_argument);
  CHECK_THROWS_AS(Dyadic::parse_decimal("0.0625", 3), std::invalid_argument);
  CHECK_THROWS_AS(Dyadic::parse_decimal("1e3"), std::invalid_argument);
  CHECK_THROWS_AS(Dyadic::parse_decimal(""), std::invalid_argument);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Dyadic d(std::int64_t(rng() % 200001) - 100000, int(rng() % 21) - 10);
    CHECK(Dyadic::parse_decimal(d.to_string()) == d);
  }
}

TEST_CASE("qint_from_fixed follows the fixed<S,W,I> formulas") {
  CHECK(qint_from_fixed({true, 8, 8}) == qi(-128, 127));
  CHECK(qint_from_fixed({false, 1, 1}) == qi(0, 1));
  // l = -2^(2-1), h = 2^(2-1) - 2^(2-4), step 2^(2-4)
  const QInterval q = qint_from_fixed({true, 4, 2});
  CHECK(q.low == Dyadic(-2));
  CHECK(q.high == Dyadic(7, -2));
  CHECK(q.step_exp == -2);
}

TEST_CASE("bitwidth_spec inverts qint_from_fixed") {
  for (int s = 0; s <= 1; ++s)
    for (int w = 1; w <= 16; ++w)
      for (int i = -4; i <= w + 4; ++i) {
        const BitWidthSpec spec{s == 1, w, i};
        CAPTURE(spec);
        CHECK(bitwidth_spec(qint_from_fixed(spec)) == spec);
      }
  CHECK(bitwidth_spec(QInterval::zero()).width == 0);
}

TEST_CASE("qint_add examples") {
  CHECK(qint_add(qi(0, 3), qi(0, 3), 1, 0) == qi(0, 6));
  CHECK(qint_add(qi(0, 3), qi(0, 3), -1, 1) == qi(-6, 3));
  CHECK(qint_add(sint(8), sint(8), 1, 0) == qi(-256, 254));
  CHECK(qint_add(qi(0, 3), QInterval::zero(), -1, 4) == qi(0, 3));
  CHECK(qint_add(QInterval::zero(), qi(0, 3), -1, 1) == qi(-3, 0, 1));
}

TEST_CASE("qint_add is sound and tight") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> lo(-20, 20), len(0, 12), ex(-2, 2), sh(-3, 3);
  for (int trial = 0; trial < 300; ++trial) {
    const int ea = ex(rng), eb = ex(rng), shift = sh(rng), sign = rng() % 2 ? 1 : -1;
    const std::int64_t la = lo(rng), lb = lo(rng);
    const QInterval a = qi(la, la + len(rng), ea);
    const QInterval b = qi(lb, lb + len(rng), eb);
    const QInterval r = qint_add(a, b, sign, shift);
    Dyadic seen_lo, seen_hi;
    bool first = true;
    for (std::int64_t u = a.low.to_units(ea); Dyadic(u, ea) <= a.high; ++u)
      for (std::int64_t v = b.low.to_units(eb); Dyadic(v, eb) <= b.high; ++v) {
        const Dyadic rhs = Dyadic(v, eb).shifted(shift);
        const Dyadic sum = Dyadic(u, ea) + (sign > 0 ? rhs : -rhs);
        REQUIRE(r.contains(sum));
        seen_lo = first ? sum : std::min(seen_lo, sum);
        seen_hi = first ? sum : std::max(seen_hi, sum);
        first = false;
      }
    CHECK(seen_lo == r.low);
    CHECK(seen_hi == r.high);
  }
}

TEST_CASE("adder_cost examples") {
  CHECK(adder_cost(sint(8), sint(8), 1, 0) == 9);
  CHECK(adder_cost(sint(8), sint(4), 1, 2) == 9);
  CHECK(adder_cost(sint(4), sint(4), 1, -3) == 8);
  CHECK(adder_cost(sint(8), sint(8), 1, 8) == 0);  // disjoint: wiring only
  CHECK(adder_cost(sint(8), QInterval::zero(), 1, 0) == 0);
}

TEST_CASE("adder_cost is monotone in operand width") {
  for (int shift = -6; shift <= 6; ++shift)
    for (int wa = 1; wa < 12; ++wa)
      for (int wb = 1; wb < 12; ++wb) {
        const auto c = adder_cost(sint(wa), sint(wb), 1, shift);
        CHECK(adder_cost(sint(wa + 1), sint(wb), 1, shift) >= c);
        CHECK(adder_cost(sint(wa), sint(wb + 1), 1, shift) >= c);
      }
}

TEST_CASE("overlap_bits examples") {
  CHECK(overlap_bits(sint(8), sint(8), 0) == 8);
  CHECK(overlap_bits(sint(8), sint(4), 0) == 4);
  CHECK(overlap_bits(sint(8), sint(8), 8) == 0);
  CHECK(overlap_bits(sint(8), sint(8), -3) == 5);
}
