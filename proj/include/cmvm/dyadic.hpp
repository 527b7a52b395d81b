#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cmvm {

/// Exact binary fraction `mantissa * 2^exponent`.
///
/// Values are kept normalized (odd mantissa, or zero with exponent 0), so two
/// equal values always have identical fields. All arithmetic is checked: a
/// result that does not fit a 64-bit mantissa throws std::overflow_error.
class Dyadic {
public:
  constexpr Dyadic() = default;
  Dyadic(std::int64_t mantissa, int exponent = 0);

  static Dyadic pow2(int exponent) { return Dyadic(1, exponent); }

  std::int64_t mantissa() const { return mantissa_; }
  int exponent() const { return exponent_; }

  bool is_zero() const { return mantissa_ == 0; }
  int sign() const { return (mantissa_ > 0) - (mantissa_ < 0); }
  /// True when the value is an integer.
  bool is_integer() const { return mantissa_ == 0 || exponent_ >= 0; }

  /// Position of the most significant bit of |value| (floor(log2|v|)).
  /// Undefined for zero.
  int msb() const;

  Dyadic operator-() const;
  Dyadic operator+(const Dyadic& rhs) const;
  Dyadic operator-(const Dyadic& rhs) const;
  Dyadic operator*(const Dyadic& rhs) const;
  Dyadic& operator+=(const Dyadic& rhs) { return *this = *this + rhs; }
  Dyadic& operator-=(const Dyadic& rhs) { return *this = *this - rhs; }

  /// Multiply by 2^shift (exact; shift may be negative).
  Dyadic shifted(int shift) const;

  /// The integer `value / 2^exp`; throws std::domain_error if it is not one.
  std::int64_t to_units(int exp) const;

  bool operator==(const Dyadic&) const = default;
  std::strong_ordering operator<=>(const Dyadic& rhs) const;

  double to_double() const;
  /// Exact decimal rendering, e.g. "-1.375".
  std::string to_string() const;

  /// Parse a decimal literal such as "12", "-0.375" or "+3.5". Throws
  /// std::invalid_argument when the text is malformed, the value is not a
  /// binary fraction, or it needs more than `max_frac_bits` fractional bits.
  static Dyadic parse_decimal(std::string_view text, int max_frac_bits = 32);

private:
  std::int64_t mantissa_ = 0;
  int exponent_ = 0;
};

std::string to_string(const Dyadic& d);

} // namespace cmvm
