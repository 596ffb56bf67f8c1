#pragma once

// Checked 128-bit integer arithmetic and a small exact rational type.
//
// Every operation either produces the exact mathematical result or throws
// OverflowError; nothing wraps.

#include <compare>
#include <cstdint>
#include <string>

#include "sqapprox/errors.hpp"

namespace sqapprox {

using Int = std::int64_t;
using Wide = __int128;

namespace exact {

inline Wide add(Wide a, Wide b) {
  Wide r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("128-bit addition overflow");
  return r;
}

inline Wide sub(Wide a, Wide b) {
  Wide r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("128-bit subtraction overflow");
  return r;
}

inline Wide mul(Wide a, Wide b) {
  Wide r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("128-bit multiplication overflow");
  return r;
}

inline Int mul64(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("64-bit multiplication overflow");
  return r;
}

inline Int add64(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("64-bit addition overflow");
  return r;
}

inline Wide abs(Wide a) {
  if (a < 0) return sub(0, a);
  return a;
}

Wide gcd(Wide a, Wide b);

/// Decimal rendering; iostreams have no overload for __int128.
std::string to_string(Wide v);

}  // namespace exact

/// Exact rational p/q with q > 0 and gcd(p, q) = 1, backed by checked 128-bit integers.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(Wide num, Wide den = 1);  // NOLINT(google-explicit-constructor)

  /// Every finite double is a dyadic rational; throws OverflowError when
  /// its denominator needs more than 2^126.
  static Rational from_double(double v);

  /// Parses "p", "-p" or "p/q".
  static Rational parse(const std::string& text);

  [[nodiscard]] Wide num() const { return num_; }
  [[nodiscard]] Wide den() const { return den_; }
  [[nodiscard]] double to_double() const;
  [[nodiscard]] bool is_zero() const { return num_ == 0; }
  [[nodiscard]] int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }
  [[nodiscard]] Rational abs() const { return {exact::abs(num_), den_}; }
  [[nodiscard]] std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a) { return {exact::sub(0, a.num_), a.den_}; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  /// Exact three-way comparison against a double (no rounding of either side).
  [[nodiscard]] std::strong_ordering compare(double v) const;

 private:
  Wide num_ = 0;
  Wide den_ = 1;
};

}  // namespace sqapprox
