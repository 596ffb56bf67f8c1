#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "sqapprox/errors.hpp"
#include "sqapprox/lattice.hpp"

using namespace sqapprox;

namespace {

// Independent oracle: gcd and ratio test written directly from the definition.
bool naive_sieved(Int a1, Int a2) {
  if (std::gcd(a1, a2) != 1 || a2 == 0) return false;
  return 2 * a1 >= a2 && a1 <= 2 * a2;
}

Int naive_phi(Int q) {
  Int count = 0;
  for (Int k = 1; k <= q; ++k) count += std::gcd(k, q) == 1 ? 1 : 0;
  return count;
}

}  // namespace

TEST(Height, Examples) {
  EXPECT_EQ(height(CoeffVector({3, 5})), 5);
  EXPECT_EQ(height(CoeffVector({0, 0})), 0);
  EXPECT_EQ(height(CoeffVector({7, 2, 9})), 9);
}

TEST(CoeffVector, RejectsBadInput) {
  EXPECT_THROW(CoeffVector({4}), DomainError);
  EXPECT_THROW(CoeffVector({1, -2}), DomainError);
}

TEST(CoeffVector, SquaredNormBounds) {
  for (Int a = 0; a <= 20; ++a) {
    for (Int b = 0; b <= 20; ++b) {
      const CoeffVector v({a, b});
      if (v.is_zero()) continue;
      const double h2 = static_cast<double>(v.height() * v.height());
      EXPECT_GE(v.squared_norm(), h2 * (1 - 1e-15));
      EXPECT_LE(v.squared_norm(), std::sqrt(2.0) * h2 * (1 + 1e-15));
    }
  }
}

TEST(PassesSieve, Examples) {
  EXPECT_FALSE(passes_sieve(CoeffVector({2, 4})));
  EXPECT_FALSE(passes_sieve(CoeffVector({1, 3})));
  EXPECT_TRUE(passes_sieve(CoeffVector({3, 2})));
  EXPECT_FALSE(passes_sieve(CoeffVector({1, 0})));  // a2 = 0 fails the ratio test
  EXPECT_TRUE(passes_sieve(CoeffVector({1, 2})));   // ratio 1/2 is inside the closed range
  EXPECT_TRUE(passes_sieve(CoeffVector({2, 1})));
}

TEST(PassesSieve, ZeroVectorHasDistinctError) {
  EXPECT_THROW((void)passes_sieve(CoeffVector({0, 0})), ZeroVectorError);
}

TEST(PassesSieve, CustomBoundsAndValidation) {
  SieveConfig cfg;
  cfg.lo = {1, 3};
  cfg.hi = {3, 1};
  EXPECT_TRUE(passes_sieve(CoeffVector({1, 3}), cfg));
  cfg.require_coprime = false;
  EXPECT_TRUE(passes_sieve(CoeffVector({2, 4}), cfg));
  SieveConfig bad;
  bad.lo = {3, 2};
  EXPECT_THROW(bad.validate(), DomainError);
  EXPECT_THROW(enumerate_sieved(1, 4, bad, 2), DomainError);
}

TEST(EnumerateSieved, SingleHeightOne) {
  const auto v = enumerate_sieved(1, 1, SieveConfig{}, 2);
  ASSERT_EQ(v.size(), 1U);
  EXPECT_EQ(v[0], CoeffVector({1, 1}));
}

TEST(EnumerateSieved, MatchesNaiveDoubleLoop) {
  const Int h_max = 64;
  std::vector<CoeffVector> naive;
  for (Int a1 = 0; a1 <= h_max; ++a1) {
    for (Int a2 = 0; a2 <= h_max; ++a2) {
      if (naive_sieved(a1, a2)) naive.push_back(CoeffVector({a1, a2}));
    }
  }
  const auto got = enumerate_sieved(1, h_max, SieveConfig{}, 2);
  EXPECT_EQ(got, naive);  // same set, same lexicographic order
  for (const auto& v : got) EXPECT_TRUE(passes_sieve(v));
}

TEST(EnumerateSieved, HeightWindowAndHigherDimension) {
  const auto v = enumerate_sieved(3, 5, SieveConfig{}, 3);
  std::set<std::vector<Int>> seen;
  for (const auto& x : v) {
    EXPECT_GE(x.height(), 3);
    EXPECT_LE(x.height(), 5);
    EXPECT_TRUE(passes_sieve(x));
    EXPECT_TRUE(seen.insert({x.coords().begin(), x.coords().end()}).second);
  }
  std::size_t naive = 0;
  for (Int a = 0; a <= 5; ++a) {
    for (Int b = 0; b <= 5; ++b) {
      for (Int c = 0; c <= 5; ++c) {
        const Int h = std::max({a, b, c});
        if (h < 3 || b == 0) continue;
        if (std::gcd(std::gcd(a, b), c) == 1 && 2 * a >= b && a <= 2 * b) ++naive;
      }
    }
  }
  EXPECT_EQ(v.size(), naive);
}

TEST(EnumerateSieved, StreamRestartsFromAnyHeight) {
  SievedStream s(10, 12, SieveConfig{}, 2);
  std::size_t count = 0;
  while (auto v = s.next()) ++count;
  EXPECT_EQ(count, enumerate_sieved(10, 12, SieveConfig{}, 2).size());
  EXPECT_FALSE(s.next().has_value());
}

TEST(EnumerateSieved, Preconditions) {
  EXPECT_THROW(enumerate_sieved(0, 3, SieveConfig{}, 2), DomainError);
  EXPECT_THROW(enumerate_sieved(4, 3, SieveConfig{}, 2), DomainError);
  EXPECT_THROW(enumerate_sieved(1, 3, SieveConfig{}, 1), DomainError);
  EXPECT_THROW(enumerate_sieved(1, Int{1} << 40, SieveConfig{}, 2), OverflowError);
}

TEST(CountSievedDyadic, MatchesBruteForce) {
  for (int k = 0; k <= 6; ++k) {
    const Int lo = Int{1} << k;
    const Int hi = Int{1} << (k + 1);
    Int naive = 0;
    for (Int a = 0; a < hi; ++a) {
      for (Int b = 0; b < hi; ++b) {
        const Int h = std::max(a, b);
        if (h >= lo && naive_sieved(a, b)) ++naive;
      }
    }
    EXPECT_EQ(count_sieved_dyadic(k), naive) << "k=" << k;
  }
  EXPECT_EQ(count_sieved_dyadic(0), 1);
  EXPECT_EQ(count_sieved_dyadic(3), 54);
}

TEST(CountSievedDyadic, DensityNearNineOverPiSquared) {
  const double ratio = static_cast<double>(count_sieved_dyadic(10)) / std::ldexp(1.0, 20);
  EXPECT_GE(ratio, 0.87);
  EXPECT_LE(ratio, 0.96);
}

TEST(CountSievedDyadic, HigherDimensionMatchesEnumeration) {
  EXPECT_EQ(count_sieved_dyadic(2, 3), static_cast<Int>(enumerate_sieved(4, 7, SieveConfig{}, 3).size()));
}

TEST(Totient, TableMatchesDefinition) {
  const auto phi = totient_table(200);
  for (Int q = 1; q <= 200; ++q) EXPECT_EQ(phi[q], naive_phi(q)) << q;
}

TEST(Totient, SummatoryExamples) {
  EXPECT_EQ(totient_summatory(1), 1);
  EXPECT_EQ(totient_summatory(10), 32);
  const double q = 1e4;
  const double asym = 3.0 / (M_PI * M_PI) * q * q;
  EXPECT_NEAR(static_cast<double>(totient_summatory(10000)), asym, 0.01 * asym);
  EXPECT_THROW((void)totient_summatory(0), DomainError);
}

TEST(Totient, BlockSumIsTheExactDyadicCount) {
  for (int k = 2; k <= 10; ++k) EXPECT_EQ(totient_block_sum(k), count_sieved_dyadic(k)) << "k=" << k;
}

TEST(Totient, HalvingIdentityValues) {
  // The halving form is computed as written; it tracks N_k only to leading order.
  const Int expected[] = {2, 2, 16, 52, 256, 896, 3780, 14804, 60104, 238608, 956796};
  for (int k = 0; k <= 10; ++k) EXPECT_EQ(totient_halving_count(k), expected[k]) << "k=" << k;
  for (int k = 6; k <= 10; ++k) {
    const double rel = std::fabs(static_cast<double>(totient_halving_count(k) - count_sieved_dyadic(k))) /
                       static_cast<double>(count_sieved_dyadic(k));
    EXPECT_LT(rel, 0.03) << "k=" << k;
  }
}

TEST(Det2, FactorizationOfSquaredDeterminant) {
  for (Int a = -12; a <= 12; ++a) {
    for (Int b = -12; b <= 12; ++b) {
      for (Int c = -12; c <= 12; ++c) {
        for (Int d = -12; d <= 12; ++d) {
          EXPECT_EQ(det2(a * a, b * b, c * c, d * d), det2(a, b, c, d) * det2(a, -b, c, d));
        }
      }
    }
  }
}

TEST(AngleBetween, Examples) {
  const auto p = angle_between(CoeffVector({1, 1}), CoeffVector({1, 2}));
  EXPECT_EQ(p.det_squares, 3);
  EXPECT_NEAR(p.sin_alpha, 3.0 / std::sqrt(34.0), 1e-15);
  EXPECT_EQ(angle_between(CoeffVector({2, 3}), CoeffVector({2, 3})).sin_alpha, 0.0);
  const auto q = angle_between(CoeffVector({1, 2}), CoeffVector({2, 1}));
  EXPECT_EQ(q.det_squares, -15);
  EXPECT_EQ(q.det_squares, det2(1, 2, 2, 1) * det2(1, -2, 2, 1));
}

TEST(AngleBetween, PlanarNormIdentity) {
  const auto vs = enumerate_sieved(1, 24, SieveConfig{}, 2);
  for (std::size_t i = 0; i < vs.size(); i += 3) {
    for (std::size_t j = i + 1; j < vs.size(); j += 5) {
      const auto p = angle_between(vs[i], vs[j]);
      const double lhs = vs[i].squared_norm() * vs[j].squared_norm() * p.sin_alpha;
      EXPECT_NEAR(lhs, std::fabs(static_cast<double>(p.det_squares)), 1e-9 * lhs + 1e-12);
    }
  }
}

TEST(AngleBetween, DominantMinorInHigherDimension) {
  const auto p = angle_between(CoeffVector({1, 1, 3}), CoeffVector({1, 2, 1}));
  // Minors of (1,1,9; 1,4,1): (0,1) -> 3, (0,2) -> -8, (1,2) -> -35.
  EXPECT_EQ(p.det_squares, -35);
  EXPECT_EQ(p.minor_i, 1U);
  EXPECT_EQ(p.minor_j, 2U);
  const double wedge = std::sqrt(9.0 + 64.0 + 35.0 * 35.0);
  EXPECT_NEAR(p.sin_alpha, wedge / (std::sqrt(83.0) * std::sqrt(18.0)), 1e-15);
  EXPECT_THROW((void)angle_between(CoeffVector({0, 0}), CoeffVector({1, 1})), ZeroVectorError);
}

TEST(AngleBetween, FloorAndNonzeroDeterminantForSievedPairs) {
  const auto vs = enumerate_sieved(1, 32, SieveConfig{}, 2);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      const auto p = angle_between(vs[i], vs[j]);
      EXPECT_GE(exact::abs(p.det_squares), 1);
      const double h = static_cast<double>(vs[i].height());
      const double hp = static_cast<double>(vs[j].height());
      ASSERT_GE(h * hp * p.sin_alpha, 0.125);
      ASSERT_GE(p.sin_alpha, 1.0 / (2.0 * h * h * hp * hp));
    }
  }
}

TEST(ClassifyAngle, Examples) {
  EXPECT_EQ(classify_angle(1.0, 0.5, 4, 4), AngleClass::Big);
  EXPECT_EQ(classify_angle(0.0, 0.5, 4, 4), AngleClass::UltraSmall);
  // Boundary 1/(r h) belongs to Big.
  EXPECT_EQ(classify_angle(1.0 / (0.5 * 8.0), 0.5, 8, 3), AngleClass::Big);
  EXPECT_EQ(classify_angle(0.2, 0.5, 8, 3), AngleClass::ModeratelySmall);
  // Boundary 1/(r^2 h h') is not UltraSmall.
  EXPECT_EQ(classify_angle(1.0 / (0.25 * 8.0 * 3.0), 0.5, 8, 3), AngleClass::ModeratelySmall);
  EXPECT_EQ(classify_angle(0.2, 0.5, 3, 8), classify_angle(0.2, 0.5, 8, 3));  // heights are ordered
  EXPECT_THROW((void)classify_angle(0.5, 1.0, 2, 2), DomainError);
  EXPECT_THROW((void)classify_angle(0.5, 0.5, 2, 0), DomainError);
}

TEST(ClassifyAngle, PartitionIsTotalAndExclusive) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Int> height(1, 500);
  for (int t = 0; t < 20000; ++t) {
    const double s = unit(rng);
    const double r = 0.01 + 0.98 * unit(rng);
    Int h = height(rng);
    Int hp = height(rng);
    const AngleClass c = classify_angle(s, r, h, hp);
    if (h < hp) std::swap(h, hp);
    const bool big = s >= 1.0 / (r * static_cast<double>(h));
    const bool ultra = !big && s < 1.0 / (r * r * static_cast<double>(h) * static_cast<double>(hp));
    const AngleClass expected = big ? AngleClass::Big : (ultra ? AngleClass::UltraSmall : AngleClass::ModeratelySmall);
    ASSERT_EQ(c, expected);
  }
  EXPECT_STREQ(to_string(AngleClass::ModeratelySmall), "ModeratelySmall");
}
