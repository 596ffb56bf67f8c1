#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "sqapprox/errors.hpp"
#include "sqapprox/strips.hpp"

using namespace sqapprox;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(PsiEval, Examples) {
  EXPECT_DOUBLE_EQ(psi_eval(ApproxFunction::power_law(2), 10), 0.01);
  EXPECT_EQ(psi_eval(ApproxFunction::power_law(3.7), 1), 1.0);
  const ApproxFunction table(PsiTable{{{1, 0.5}, {4, 0.1}}});
  EXPECT_EQ(psi_eval(table, 2), 0.5);
  EXPECT_EQ(psi_eval(table, 4), 0.1);
  EXPECT_THROW((void)psi_eval(table, 5), DomainError);
  EXPECT_THROW((void)psi_eval(ApproxFunction::power_law(2), 0), DomainError);
}

TEST(ApproxFunction, ScaledPowerLawAndValidation) {
  EXPECT_DOUBLE_EQ(ApproxFunction::power_law(1, 0.5)(4), 0.125);
  EXPECT_THROW(ApproxFunction::power_law(0), DomainError);
  EXPECT_THROW(ApproxFunction::power_law(1, -1), DomainError);
  EXPECT_THROW(ApproxFunction(PsiTable{{{2, 0.5}, {4, 0.1}}}), DomainError);  // must start at h = 1
  EXPECT_THROW(ApproxFunction(PsiTable{{{1, 0.1}, {4, 0.5}}}), DomainError);  // increasing
  EXPECT_THROW(ApproxFunction(PsiTable{{{1, 0.5}, {4, 0.5}}}), DomainError);  // does not decay
  EXPECT_THROW(ApproxFunction(PsiTable{{{1, 0.5}, {4, 0.0}}}), DomainError);  // not positive
}

TEST(ApproxFunction, ParseSpecs) {
  EXPECT_DOUBLE_EQ(ApproxFunction::parse("pow:2")(3), 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(ApproxFunction::parse("pow:1*0.25")(2), 0.125);
  EXPECT_THROW((void)ApproxFunction::parse("pow:x"), DomainError);
  EXPECT_THROW((void)ApproxFunction::parse("pow:1*y"), DomainError);
  EXPECT_THROW((void)ApproxFunction::parse("exp:1"), DomainError);
  const auto path = write_temp("sqapprox_psi.csv", "h,psi\n1,0.5\n4,0.1\n");
  const auto f = ApproxFunction::parse("table:" + path.string());
  EXPECT_EQ(f(3), 0.5);
  EXPECT_EQ(f.max_height(), 4);
  const auto bad = write_temp("sqapprox_psi_bad.csv", "1,0.5\n2,zz\n");
  EXPECT_THROW((void)ApproxFunction::load_table(bad), DomainError);
  EXPECT_THROW((void)ApproxFunction::load_table("/nonexistent/psi.csv"), DomainError);
}

TEST(LowerOrder, Examples) {
  EXPECT_EQ(lower_order(ApproxFunction::power_law(3), 8), 3.0);
  EXPECT_EQ(lower_order(ApproxFunction::power_law(1), 40), 1.0);  // the n-1 boundary for n = 2
  // psi(2^r) = 2^{-2r} for even r and 2^{-3r} for odd r: the window minimum is 2.
  auto oscillating = [](int r) { return std::ldexp(1.0, r % 2 == 0 ? -2 * r : -3 * r); };
  EXPECT_DOUBLE_EQ(lower_order(oscillating, 20), 2.0);
  EXPECT_THROW((void)lower_order(ApproxFunction::power_law(2), 3), DomainError);
}

TEST(LowerOrder, ScaledPowerLawApproachesExponent) {
  const double est = lower_order(ApproxFunction::power_law(2, 0.5), 40);
  EXPECT_NEAR(est, 2.0, 1.0 / 20.0 + 1e-12);  // log(2)/ (r log 2) with r >= 20
}

TEST(Strip, ThicknessAndNormBounds) {
  const Strip s(CoeffVector({3, 4}), 5, 0.2);
  EXPECT_DOUBLE_EQ(s.thickness(), 0.4 / std::sqrt(337.0));
  EXPECT_THROW(Strip(CoeffVector({0, 0}), 1, 0.1), ZeroVectorError);
  EXPECT_THROW(Strip(CoeffVector({1, 1}), -1, 0.1), DomainError);
  const Strip p(CoeffVector({2, 5}), 3, ApproxFunction::power_law(2));
  EXPECT_DOUBLE_EQ(p.half_width, 1.0 / 25.0);
}

TEST(StripContains, Examples) {
  const Strip s(CoeffVector({1, 1}), 1, 0.1);
  EXPECT_TRUE(strip_contains(s, std::vector<double>{0.5, 0.5}));
  EXPECT_FALSE(strip_contains(s, std::vector<double>{1.0, 0.2}));
  const Strip p(CoeffVector({3, 4}), 5, 1e-12);
  EXPECT_TRUE(strip_contains(p, std::vector<double>{1.0, 1.0}));
}

TEST(StripContains, StrictBoundaryIsExact) {
  // x + y = 1.25 exactly is on the boundary of |x + y - 1| < 0.25.
  const Strip s(CoeffVector({1, 1}), 1, 0.25);
  EXPECT_FALSE(strip_contains(s, std::vector<double>{0.5, 0.75}));
  EXPECT_TRUE(strip_contains(s, std::vector<double>{0.5, std::nextafter(0.75, 0.0)}));
  EXPECT_FALSE(strip_contains(s, std::vector<Rational>{Rational(1, 2), Rational(3, 4)}));
  EXPECT_TRUE(strip_contains(s, std::vector<Rational>{Rational(1, 2), Rational(2, 3)}));
  EXPECT_THROW((void)strip_contains(s, std::vector<double>{0.5}), DomainError);
}

TEST(AdmissibleInterval, Example) {
  const Ball ball{{0.5, 0.5}, 0.1, 0.25};
  const auto iv = admissible_c_interval(CoeffVector({3, 4}), ball);
  EXPECT_NEAR(iv.c_lo, std::sqrt(12.5 - 0.1 * std::sqrt(337.0)), 1e-14);
  EXPECT_NEAR(iv.c_hi, std::sqrt(12.5 + 0.1 * std::sqrt(337.0)), 1e-14);
  EXPECT_NEAR(iv.c_lo, 3.2656, 1e-4);
  EXPECT_NEAR(iv.c_hi, 3.7863, 1e-4);
  EXPECT_NEAR(iv.length, iv.c_hi - iv.c_lo, 1e-14);
}

TEST(AdmissibleInterval, HeightWindowForLargeHeights) {
  const double eps = 0.4;
  const Ball ball{{0.7, 0.7}, 0.2, eps};
  for (const auto& a : std::vector<CoeffVector>{CoeffVector({100, 150}), CoeffVector({200, 101}),
                                                CoeffVector({97, 97}), CoeffVector({512, 300})}) {
    const auto f = ApproxFunction::power_law(1);
    auto [c_min, c_max] = candidate_c_range(a, ball, f(a.height()));
    const double h = static_cast<double>(a.height());
    for (Int c = c_min; c <= c_max; ++c) {
      EXPECT_GT(static_cast<double>(c), eps / 2 * h);
      EXPECT_LT(static_cast<double>(c), 2 * h);
    }
  }
}

TEST(AdmissibleInterval, XiScalingOverAllSievedVectors) {
  const Ball ball = Ball::standard(2);
  for (const auto& a : enumerate_sieved(1, 256, SieveConfig{}, 2)) {
    const double ratio = admissible_c_interval(a, ball).length / (ball.radius * static_cast<double>(a.height()));
    ASSERT_GE(ratio, 0.5) << a[0] << "," << a[1];
    ASSERT_LE(ratio, 8.0 / ball.eps) << a[0] << "," << a[1];
  }
}

TEST(AdmissibleInterval, ContainsEveryStripMeetingTheBall) {
  std::mt19937_64 rng(11);
  const Ball ball = Ball::standard(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto f = ApproxFunction::power_law(0.5);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> x{u(rng), u(rng)};
    if (x[0] * x[0] + x[1] * x[1] >= 1.0) continue;
    x[0] = 0.5 + ball.radius * x[0];
    x[1] = 0.5 + ball.radius * x[1];
    for (const auto& s : solutions_at_point(x, f, 12)) {
      if (s.a[0] == 0 || s.a[1] == 0) continue;
      auto [lo, hi] = candidate_c_range(s.a, ball, f(s.a.height()));
      const auto iv = admissible_c_interval(s.a, ball);
      EXPECT_GE(s.c, lo);
      EXPECT_LE(s.c, hi);
      EXPECT_GE(static_cast<double>(s.c), iv.c_lo - 2.0);
      EXPECT_LE(static_cast<double>(s.c), iv.c_hi + 2.0);
    }
  }
}

TEST(Regions, ValidationAndVolumes) {
  EXPECT_NO_THROW(validate_region(Ball::standard(3)));
  EXPECT_THROW(validate_region(Ball{{0.3, 0.5}, 0.2, 0.25}), DomainError);  // pokes below eps
  EXPECT_THROW(validate_region(ShavedCube{1.5, 2}), DomainError);
  EXPECT_NEAR(Ball::standard(2).volume(), M_PI * 0.04, 1e-15);
  EXPECT_NEAR(Ball::standard(3).volume(), 4.0 / 3.0 * M_PI * 0.008, 1e-15);
  EXPECT_DOUBLE_EQ(region_volume(ShavedCube{0.25, 2}), 0.5625);
  EXPECT_TRUE(region_contains(Ball::standard(2), std::vector<double>{0.5, 0.69}));
  const Ball quarter{{0.5, 0.5}, 0.25, 0.25};
  EXPECT_FALSE(region_contains(quarter, std::vector<double>{0.75, 0.5}));  // open ball
  EXPECT_TRUE(region_contains(ShavedCube{0.25, 2}, std::vector<double>{0.25, 1.0}));  // closed cube
}

TEST(SolutionsAtPoint, PythagoreanAndCorner) {
  const auto sols = solutions_at_point(std::vector<double>{1.0, 1.0}, ApproxFunction::power_law(5), 5);
  bool found = false;
  for (const auto& s : sols) found = found || (s.a == CoeffVector({3, 4}) && s.c == 5 && s.residual == 0.0);
  EXPECT_TRUE(found);

  const Int h_max = 6;
  const auto corner = solutions_at_point(std::vector<double>{0.0, 0.0}, ApproxFunction::power_law(1), h_max);
  EXPECT_EQ(corner.size(), static_cast<std::size_t>((h_max + 1) * (h_max + 1) - 1));
  for (const auto& s : corner) EXPECT_EQ(s.c, 0);
  EXPECT_THROW((void)solutions_at_point(std::vector<double>{1.5, 0.0}, ApproxFunction::power_law(1), 3),
               DomainError);
}

TEST(SolutionsAtPoint, MatchesNaiveTripleLoop) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto f = ApproxFunction::power_law(0.7);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> x{u(rng), u(rng)};
    const Int h_max = 8 + t % 25;  // 8..32
    std::vector<std::tuple<Int, Int, Int, Int>> naive;
    for (Int a1 = 0; a1 <= h_max; ++a1) {
      for (Int a2 = 0; a2 <= h_max; ++a2) {
        if (a1 == 0 && a2 == 0) continue;
        const Int h = std::max(a1, a2);
        const double psi = std::pow(static_cast<double>(h), -0.7);
        for (Int c = 0; c <= 2 * h_max; ++c) {
          const long double lf = static_cast<long double>(a1 * a1) * x[0] + static_cast<long double>(a2 * a2) * x[1];
          if (std::fabs(lf - static_cast<long double>(c * c)) < psi) naive.emplace_back(h, a1, a2, c);
        }
      }
    }
    std::sort(naive.begin(), naive.end());
    const auto got = solutions_at_point(x, f, h_max);
    ASSERT_EQ(got.size(), naive.size()) << "point " << t;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(std::make_tuple(got[i].a.height(), got[i].a[0], got[i].a[1], got[i].c), naive[i]);
    }
  }
}

TEST(SolutionsAtPoint, FewSolutionsPerVector) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto f = ApproxFunction::power_law(0.2);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> x{u(rng), u(rng)};
    const auto sols = solutions_at_point(x, f, 20);
    std::map<std::pair<Int, Int>, int> per_vector;
    for (const auto& s : sols) ++per_vector[{s.a[0], s.a[1]}];
    for (const auto& [a, count] : per_vector) {
      const double psi = f(std::max(a.first, a.second));
      EXPECT_LE(count, static_cast<int>(std::ceil(2 * psi + 1)) + 2);
    }
  }
}
