#include "sqapprox/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sqapprox {

namespace exact {

Wide gcd(Wide a, Wide b) {
  a = abs(a);
  b = abs(b);
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::string to_string(Wide v) {
  if (v == 0) return "0";
  bool negative = v < 0;
  // Work on the negative side so the minimum value does not overflow.
  Wide x = negative ? v : -v;
  std::string digits;
  while (x != 0) {
    digits.push_back(static_cast<char>('0' - static_cast<int>(x % 10)));
    x /= 10;
  }
  if (negative) digits.push_back('-');
  std::reverse(digits.begin(), digits.end());
  return digits;
}

}  // namespace exact

Rational::Rational(Wide num, Wide den) {
  if (den == 0) throw DomainError("rational with zero denominator");
  if (den < 0) {
    num = exact::sub(0, num);
    den = exact::sub(0, den);
  }
  Wide g = exact::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  num_ = num;
  den_ = den;
}

Rational Rational::from_double(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite double has no rational value");
  if (v == 0.0) return {};
  int exponent = 0;
  double mantissa = std::frexp(v, &exponent);  // v = mantissa * 2^exponent, 0.5 <= |m| < 1
  auto m = static_cast<Wide>(std::ldexp(mantissa, 53));
  exponent -= 53;
  while (m % 2 == 0 && exponent < 0) {
    m /= 2;
    ++exponent;
  }
  if (exponent >= 0) {
    if (exponent > 72) throw OverflowError("double too large for 128-bit rational");
    return {exact::mul(m, static_cast<Wide>(1) << exponent), 1};
  }
  if (-exponent > 126) throw OverflowError("double too small for 128-bit rational");
  return {m, static_cast<Wide>(1) << (-exponent)};
}

Rational Rational::parse(const std::string& text) {
  auto parse_int = [&](const std::string& s) -> Wide {
    if (s.empty()) throw DomainError("malformed rational: '" + text + "'");
    std::size_t i = 0;
    bool negative = false;
    if (s[0] == '-' || s[0] == '+') {
      negative = s[0] == '-';
      i = 1;
    }
    if (i == s.size()) throw DomainError("malformed rational: '" + text + "'");
    Wide v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw DomainError("malformed rational: '" + text + "'");
      v = exact::add(exact::mul(v, 10), s[i] - '0');
    }
    return negative ? -v : v;
  };
  auto slash = text.find('/');
  if (slash == std::string::npos) return {parse_int(text), 1};
  return {parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1))};
}

double Rational::to_double() const {
  // Long double keeps 64 mantissa bits, enough for a correctly rounded quotient in practice.
  return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_));
}

std::string Rational::str() const {
  if (den_ == 1) return exact::to_string(num_);
  return exact::to_string(num_) + "/" + exact::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  Wide g = exact::gcd(a.den_, b.den_);
  Wide da = a.den_ / g;
  Wide db = b.den_ / g;
  return {exact::add(exact::mul(a.num_, db), exact::mul(b.num_, da)), exact::mul(a.den_, db)};
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  Wide g1 = exact::gcd(a.num_, b.den_);
  Wide g2 = exact::gcd(b.num_, a.den_);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  return {exact::mul(a.num_ / g1, b.num_ / g2), exact::mul(a.den_ / g2, b.den_ / g1)};
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw DomainError("rational division by zero");
  return a * Rational(b.den_, b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  Wide lhs = exact::mul(a.num_, b.den_);
  Wide rhs = exact::mul(b.num_, a.den_);
  return lhs <=> rhs;
}

std::strong_ordering Rational::compare(double v) const {
  if (std::isinf(v)) return v > 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  try {
    return *this <=> from_double(v);
  } catch (const OverflowError&) {
    // v lies outside the 128-bit dyadic range (or the cross products overflow):
    // the magnitudes then differ by many orders and long double decides reliably.
    const long double mine = static_cast<long double>(num_) / static_cast<long double>(den_);
    const long double other = v;
    if (mine < other) return std::strong_ordering::less;
    if (mine > other) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
}

}  // namespace sqapprox
