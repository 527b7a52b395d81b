#include "cmvm/dyadic.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmvm {

namespace {

using i128 = __int128;

constexpr i128 k_i64_min = std::numeric_limits<std::int64_t>::min();
constexpr i128 k_i64_max = std::numeric_limits<std::int64_t>::max();

[[noreturn]] void overflow() { throw std::overflow_error("dyadic mantissa overflow"); }

// Build from a wide mantissa, stripping trailing zero bits before narrowing.
Dyadic from_wide(i128 m, long exp) {
  if (m == 0) return Dyadic();
  while ((m & 1) == 0) {
    m /= 2;
    ++exp;
  }
  if (m < k_i64_min || m > k_i64_max) overflow();
  if (exp < std::numeric_limits<int>::min() / 2 || exp > std::numeric_limits<int>::max() / 2) overflow();
  return Dyadic(static_cast<std::int64_t>(m), static_cast<int>(exp));
}

// m << s in 128 bits, throwing if bits would be lost.
i128 shl_checked(i128 m, int s) {
  if (m == 0) return 0;
  if (s >= 126) overflow();
  const i128 limit = i128(1) << (126 - s);
  if (m >= limit || m <= -limit) overflow();
  return m * (i128(1) << s);
}

unsigned __int128 uabs(i128 v) { return v < 0 ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v); }

} // namespace

Dyadic::Dyadic(std::int64_t mantissa, int exponent) : mantissa_(mantissa), exponent_(exponent) {
  if (mantissa_ == 0) {
    exponent_ = 0;
    return;
  }
  const int tz = std::countr_zero(static_cast<std::uint64_t>(mantissa_));
  mantissa_ >>= tz; // arithmetic shift of an even value is exact
  exponent_ += tz;
}

int Dyadic::msb() const {
  const std::uint64_t mag = mantissa_ < 0 ? 0 - static_cast<std::uint64_t>(mantissa_) : static_cast<std::uint64_t>(mantissa_);
  return exponent_ + 63 - std::countl_zero(mag);
}

Dyadic Dyadic::operator-() const {
  if (mantissa_ == std::numeric_limits<std::int64_t>::min()) overflow();
  Dyadic r;
  r.mantissa_ = -mantissa_;
  r.exponent_ = exponent_;
  return r;
}

Dyadic Dyadic::operator+(const Dyadic& rhs) const {
  if (is_zero()) return rhs;
  if (rhs.is_zero()) return *this;
  const int e = std::min(exponent_, rhs.exponent_);
  const i128 a = shl_checked(mantissa_, exponent_ - e);
  const i128 b = shl_checked(rhs.mantissa_, rhs.exponent_ - e);
  return from_wide(a + b, e);
}

Dyadic Dyadic::operator-(const Dyadic& rhs) const { return *this + (-rhs); }

Dyadic Dyadic::operator*(const Dyadic& rhs) const {
  return from_wide(i128(mantissa_) * i128(rhs.mantissa_), long(exponent_) + rhs.exponent_);
}

Dyadic Dyadic::shifted(int shift) const {
  if (is_zero()) return *this;
  return from_wide(mantissa_, long(exponent_) + shift);
}

std::int64_t Dyadic::to_units(int exp) const {
  if (is_zero()) return 0;
  if (exponent_ < exp) throw std::domain_error("value is not a multiple of 2^" + std::to_string(exp));
  const i128 v = shl_checked(mantissa_, exponent_ - exp);
  if (v < k_i64_min || v > k_i64_max) overflow();
  return static_cast<std::int64_t>(v);
}

std::strong_ordering Dyadic::operator<=>(const Dyadic& rhs) const {
  const int sa = sign(), sb = rhs.sign();
  if (sa != sb) return sa <=> sb;
  if (sa == 0) return std::strong_ordering::equal;
  const int ma = msb(), mb = rhs.msb();
  if (ma != mb) return sa > 0 ? ma <=> mb : mb <=> ma;
  // Same leading bit: exponents differ by < 64, so alignment fits 128 bits.
  const int e = std::min(exponent_, rhs.exponent_);
  const i128 a = i128(mantissa_) * (i128(1) << (exponent_ - e));
  const i128 b = i128(rhs.mantissa_) * (i128(1) << (rhs.exponent_ - e));
  return a <=> b;
}

double Dyadic::to_double() const { return std::ldexp(static_cast<double>(mantissa_), exponent_); }

std::string Dyadic::to_string() const {
  if (is_zero()) return "0";
  if (exponent_ >= 0) {
    const i128 v = shl_checked(mantissa_, exponent_);
    std::string digits;
    unsigned __int128 mag = uabs(v);
    do {
      digits.insert(digits.begin(), char('0' + int(mag % 10)));
      mag /= 10;
    } while (mag != 0);
    return (v < 0 ? "-" : "") + digits;
  }
  const int frac = -exponent_;
  if (frac > 120) throw std::overflow_error("dyadic too fine for decimal rendering");
  const unsigned __int128 mag = uabs(mantissa_);
  const unsigned __int128 one = static_cast<unsigned __int128>(1) << frac;
  unsigned __int128 ip = mag >> frac;
  unsigned __int128 rem = mag & (one - 1);
  std::string int_digits;
  do {
    int_digits.insert(int_digits.begin(), char('0' + int(ip % 10)));
    ip /= 10;
  } while (ip != 0);
  // rem < 2^frac; rem * 10 can exceed 128 bits only when frac > 124.
  std::string frac_digits;
  while (rem != 0) {
    rem *= 10;
    frac_digits.push_back(char('0' + int(rem >> frac)));
    rem &= one - 1;
  }
  return (mantissa_ < 0 ? "-" : "") + int_digits + "." + frac_digits;
}

Dyadic Dyadic::parse_decimal(std::string_view text, int max_frac_bits) {
  auto fail = [&](const char* why) {
    throw std::invalid_argument("cannot parse '" + std::string(text) + "': " + why);
  };
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) negative = text[pos++] == '-';
  std::string int_part, frac_part;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') int_part.push_back(text[pos++]);
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') frac_part.push_back(text[pos++]);
  }
  if (pos != text.size() || (int_part.empty() && frac_part.empty())) fail("not a decimal literal");
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();
  if (frac_part.size() > 27) fail("too many fractional digits");

  i128 n = 0;
  for (char c : int_part + frac_part) {
    n = n * 10 + (c - '0');
    if (n > k_i64_max) fail("magnitude too large");
  }
  // value = n / 10^f = (n / 5^f) * 2^-f, exact only if 5^f divides n.
  i128 five_pow = 1;
  for (std::size_t i = 0; i < frac_part.size(); ++i) five_pow *= 5;
  if (n % five_pow != 0) fail("not representable as a binary fraction");
  Dyadic v(static_cast<std::int64_t>(n / five_pow), -static_cast<int>(frac_part.size()));
  if (-v.exponent() > max_frac_bits) fail("exceeds the fractional-bit budget");
  return negative ? -v : v;
}

std::string to_string(const Dyadic& d) { return d.to_string(); }

} // namespace cmvm
