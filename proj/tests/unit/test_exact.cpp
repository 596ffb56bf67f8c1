#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sqapprox/errors.hpp"
#include "sqapprox/exact.hpp"

using namespace sqapprox;

TEST(Exact, CheckedArithmeticDetectsOverflow) {
  const Wide big = static_cast<Wide>(std::numeric_limits<Int>::max());
  EXPECT_EQ(exact::mul(big, 2), big * 2);
  EXPECT_THROW((void)exact::mul(big * big, big), OverflowError);
  EXPECT_THROW((void)exact::mul64(std::numeric_limits<Int>::max(), 2), OverflowError);
  EXPECT_THROW((void)exact::add64(std::numeric_limits<Int>::max(), 1), OverflowError);
  EXPECT_EQ(exact::add64(40, 2), 42);
}

TEST(Exact, WideToString) {
  EXPECT_EQ(exact::to_string(0), "0");
  EXPECT_EQ(exact::to_string(-15), "-15");
  const Wide v = static_cast<Wide>(1) << 100;
  EXPECT_EQ(exact::to_string(v), "1267650600228229401496703205376");
}

TEST(Rational, NormalizesSignAndGcd) {
  const Rational r(6, -4);
  EXPECT_EQ(r.num(), -3);
  EXPECT_EQ(r.den(), 2);
  EXPECT_EQ(r.str(), "-3/2");
  EXPECT_EQ(Rational(4, 2).str(), "2");
  EXPECT_THROW(Rational(1, 0), DomainError);
}

TEST(Rational, ArithmeticAndOrdering) {
  const Rational a(1, 2);
  const Rational b(1, 3);
  EXPECT_EQ(a + b, Rational(5, 6));
  EXPECT_EQ(a - b, Rational(1, 6));
  EXPECT_EQ(a * b, Rational(1, 6));
  EXPECT_EQ(a / b, Rational(3, 2));
  EXPECT_EQ(-a, Rational(-1, 2));
  EXPECT_LT(b, a);
  EXPECT_THROW((void)(a / Rational(0)), DomainError);
}

TEST(Rational, FromDoubleIsExactDyadic) {
  EXPECT_EQ(Rational::from_double(0.5), Rational(1, 2));
  EXPECT_EQ(Rational::from_double(-3.0), Rational(-3));
  const Rational tenth = Rational::from_double(0.1);
  EXPECT_EQ(tenth.to_double(), 0.1);
  EXPECT_NE(tenth, Rational(1, 10));  // 0.1 is not a dyadic rational
  EXPECT_THROW((void)Rational::from_double(std::nan("")), DomainError);
}

TEST(Rational, ParseForms) {
  EXPECT_EQ(Rational::parse("7"), Rational(7));
  EXPECT_EQ(Rational::parse("-2/6"), Rational(-1, 3));
  EXPECT_THROW((void)Rational::parse("1/"), DomainError);
  EXPECT_THROW((void)Rational::parse("x"), DomainError);
}

TEST(Rational, CompareAgainstDoubleExactly) {
  const Rational third(1, 3);
  EXPECT_EQ(third.compare(1.0 / 3.0), std::strong_ordering::greater);  // the double rounds down
  EXPECT_EQ(Rational(1, 4).compare(0.25), std::strong_ordering::equal);
  EXPECT_EQ(Rational(-1).compare(0.0), std::strong_ordering::less);
}
