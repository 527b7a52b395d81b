#include "cmvm/fxp.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <stdexcept>

namespace cmvm {

namespace {

int bit_length(std::int64_t v) {
  return v <= 0 ? 0 : 64 - std::countl_zero(static_cast<std::uint64_t>(v));
}

} // namespace

bool QInterval::contains(const Dyadic& v) const {
  if (v < low || v > high) return false;
  return v.is_zero() || v.exponent() >= step_exp;
}

int QInterval::msb() const {
  const BitWidthSpec s = bitwidth_spec(*this);
  return s.integer_bits - 1;
}

std::ostream& operator<<(std::ostream& os, const QInterval& q) {
  return os << '[' << q.low.to_string() << ", " << q.high.to_string() << ", 2^" << q.step_exp << ']';
}

std::ostream& operator<<(std::ostream& os, const BitWidthSpec& s) {
  return os << "fixed<" << int(s.is_signed) << ", " << s.width << ", " << s.integer_bits << '>';
}

QInterval qint_from_fixed(const BitWidthSpec& spec) {
  if (spec.width < 1) throw std::invalid_argument("fixed-point width must be >= 1");
  const int s = spec.is_signed ? 1 : 0;
  const int step = spec.integer_bits - spec.width;
  const Dyadic low = spec.is_signed ? -Dyadic::pow2(spec.integer_bits - s) : Dyadic();
  const Dyadic high = Dyadic::pow2(spec.integer_bits - s) - Dyadic::pow2(step);
  return {low, high, step};
}

BitWidthSpec bitwidth_spec(const QInterval& q) {
  if (q.is_zero()) return {false, 0, q.step_exp};
  const std::int64_t lo = q.low.to_units(q.step_exp);
  const std::int64_t hi = q.high.to_units(q.step_exp);
  BitWidthSpec spec;
  if (lo >= 0) {
    spec.is_signed = false;
    spec.width = std::max(1, bit_length(hi));
  } else {
    spec.is_signed = true;
    spec.width = std::max(bit_length(-(lo + 1)), bit_length(hi)) + 1;
  }
  spec.integer_bits = spec.width + q.step_exp;
  return spec;
}

QInterval qint_add(const QInterval& a, const QInterval& b, int sign, int shift) {
  QInterval rhs = b.shifted(shift);
  if (sign < 0) rhs = rhs.negated();
  if (rhs.is_zero()) return a;
  if (a.is_zero()) return rhs;
  return {a.low + rhs.low, a.high + rhs.high, std::min(a.step_exp, rhs.step_exp)};
}

int overlap_bits(const QInterval& a, const QInterval& b, int shift) {
  if (a.is_zero() || b.is_zero()) return 0;
  const int lo = std::max(a.lsb(), b.lsb() + shift);
  const int hi = std::min(a.msb(), b.msb() + shift);
  return std::max(0, hi - lo + 1);
}

std::int64_t adder_cost(const QInterval& a, const QInterval& b, int /*sign*/, int shift) {
  if (overlap_bits(a, b, shift) == 0) return 0;
  const std::int64_t bw_a = bitwidth_spec(a).width;
  const std::int64_t bw_b = bitwidth_spec(b).width;
  const std::int64_t s = std::int64_t(shift) + b.step_exp - a.step_exp;
  return std::max(bw_a, bw_b + s) - std::min<std::int64_t>(0, s) + 1;
}

} // namespace cmvm
