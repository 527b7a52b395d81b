#pragma once

#include <cstdint>
#include <iosfwd>

#include "cmvm/dyadic.hpp"

namespace cmvm {

/// Fixed-point format `fixed<S, W, I>`: sign flag, total width, and integer
/// bits including the sign bit.
struct BitWidthSpec {
  bool is_signed = true;
  int width = 8;
  int integer_bits = 8;

  bool operator==(const BitWidthSpec&) const = default;
};

/// Quantized interval [low, high, 2^step_exp]: the exact value set of a
/// fixed-point signal. `low` and `high` are multiples of the step.
struct QInterval {
  Dyadic low;
  Dyadic high;
  int step_exp = 0;

  static QInterval zero(int step_exp = 0) { return {Dyadic(), Dyadic(), step_exp}; }

  bool is_zero() const { return low.is_zero() && high.is_zero(); }
  Dyadic step() const { return Dyadic::pow2(step_exp); }

  QInterval negated() const { return {-high, -low, step_exp}; }
  /// Interval of `value * 2^shift`.
  QInterval shifted(int shift) const { return {low.shifted(shift), high.shifted(shift), step_exp + shift}; }

  /// True when `v` lies in [low, high] and is a multiple of the step.
  bool contains(const Dyadic& v) const;

  /// Lowest and highest bit positions occupied in two's complement. Both are
  /// meaningless for the zero interval (width 0).
  int lsb() const { return step_exp; }
  int msb() const;

  bool operator==(const QInterval&) const = default;
};

std::ostream& operator<<(std::ostream& os, const QInterval& q);
std::ostream& operator<<(std::ostream& os, const BitWidthSpec& s);

/// [l, h, d] with l = -S*2^(I-S), h = 2^(I-S) - 2^(I-W), d = 2^(I-W).
QInterval qint_from_fixed(const BitWidthSpec& spec);

/// Smallest fixed<S, W, I> holding every value of `q` at its step. The zero
/// interval yields width 0 (no bits are needed to carry a constant zero).
BitWidthSpec bitwidth_spec(const QInterval& q);

/// Exact interval of `a + sign * (b << shift)`.
QInterval qint_add(const QInterval& a, const QInterval& b, int sign, int shift);

/// Bit positions occupied by both `a` and `b << shift`.
int overlap_bits(const QInterval& a, const QInterval& b, int shift);

/// Full/half-adder count of `a +- (b << shift)`:
///   max(bw_a, bw_b + s) - min(0, s) + 1
/// where s is the shift between the operands' least significant bits. Returns
/// 0 when the operands share no bit position (the sum is pure wiring).
std::int64_t adder_cost(const QInterval& a, const QInterval& b, int sign, int shift);

} // namespace cmvm
