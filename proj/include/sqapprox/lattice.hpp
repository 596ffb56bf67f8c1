#pragma once

// Exact integer machinery for coefficient vectors: heights, the gcd/ratio
// sieve, dyadic density counts, and angles between squared vectors.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "sqapprox/exact.hpp"

namespace sqapprox {

/// Integer coefficient vector a in Z>=0^n (n >= 2) with its cached height h_a = max |a_i|.
class CoeffVector {
 public:
  explicit CoeffVector(std::vector<Int> coords);
  CoeffVector(std::initializer_list<Int> coords) : CoeffVector(std::vector<Int>(coords)) {}

  [[nodiscard]] std::span<const Int> coords() const { return coords_; }
  [[nodiscard]] std::size_t dim() const { return coords_.size(); }
  [[nodiscard]] Int height() const { return height_; }
  [[nodiscard]] bool is_zero() const { return height_ == 0; }
  [[nodiscard]] Int operator[](std::size_t i) const { return coords_[i]; }

  /// a^2 = (a_1^2, ..., a_n^2), exact.
  [[nodiscard]] std::vector<Wide> squared() const;
  /// Euclidean norm of a^2.
  [[nodiscard]] double squared_norm() const;

  friend bool operator==(const CoeffVector& x, const CoeffVector& y) { return x.coords_ == y.coords_; }
  friend auto operator<=>(const CoeffVector& x, const CoeffVector& y) { return x.coords_ <=> y.coords_; }

 private:
  std::vector<Int> coords_;
  Int height_ = 0;
};

[[nodiscard]] Int height(const CoeffVector& v);

/// Non-negative rational bound p/q used by the ratio sieve.
struct RatioBound {
  Int num = 1;
  Int den = 1;
};

/// gcd(a_1..a_n) = 1 and lo <= a_1/a_2 <= hi.
struct SieveConfig {
  bool require_coprime = true;
  RatioBound lo{1, 2};
  RatioBound hi{2, 1};

  /// Throws DomainError unless 0 < lo <= 1 <= hi.
  void validate() const;
};

/// Throws ZeroVectorError for the zero vector. a_2 = 0 always fails the ratio test.
[[nodiscard]] bool passes_sieve(const CoeffVector& v, const SieveConfig& cfg = {});

/// Lexicographic stream over all v in Z>=0^n \ {0} with h_min <= h_v <= h_max passing the sieve.
///
/// Single consumer; construct a new stream to restart from any height.
class SievedStream {
 public:
  SievedStream(Int h_min, Int h_max, SieveConfig cfg, std::size_t n);

  /// Next vector, or nullopt once exhausted.
  std::optional<CoeffVector> next();

 private:
  bool advance();

  Int h_min_;
  Int h_max_;
  SieveConfig cfg_;
  std::vector<Int> odometer_;
  bool started_ = false;
  bool done_ = false;
};

/// Collects a SievedStream into a vector.
[[nodiscard]] std::vector<CoeffVector> enumerate_sieved(Int h_min, Int h_max, const SieveConfig& cfg,
                                                        std::size_t n);

/// N_k = #{sieved v : 2^k <= h_v < 2^{k+1}} by direct enumeration.
[[nodiscard]] Int count_sieved_dyadic(int k, std::size_t n = 2);

/// Euler phi(0..q_max) by a linear-time sieve (phi(0) = 0).
[[nodiscard]] std::vector<Int> totient_table(Int q_max);

/// Exact sum_{1<=q<=Q} phi(q).
[[nodiscard]] Int totient_summatory(Int q_max);

/// The classical reduction 2 * sum_{2^k<=a<2^{k+1}} (phi(a) - phi(floor(a/2))).
///
/// Agrees with count_sieved_dyadic(k, 2) to leading order (9/pi^2) 4^k but
/// not exactly; see totient_block_sum for the exact count.
[[nodiscard]] Int totient_halving_count(int k);

/// sum_{2^k<=a<2^{k+1}} phi(a). Equals count_sieved_dyadic(k, 2) exactly for k >= 2:
/// for a >= 3 exactly phi(a)/2 of the residues coprime to a lie in [a/2, a).
[[nodiscard]] Int totient_block_sum(int k);

/// 2x2 determinant | a b ; c d |, exact.
[[nodiscard]] Wide det2(Wide a, Wide b, Wide c, Wide d);

/// Angle data between the squared vectors v^2 and w^2.
struct AnglePair {
  CoeffVector first;
  CoeffVector second;
  double sin_alpha = 0.0;
  Wide det_squares = 0;  ///< the 2x2 minor of (v^2; w^2) largest in absolute value
  std::size_t minor_i = 0;
  std::size_t minor_j = 1;
};

/// Allocation-free core of angle_between: sine of the angle between the
/// squared vectors from the full wedge product. Writes the dominant minor.
[[nodiscard]] double sin_angle_of_squares(std::span<const Int> v, std::span<const Int> w,
                                          Wide* dominant_minor = nullptr,
                                          std::size_t* minor_i = nullptr,
                                          std::size_t* minor_j = nullptr);

[[nodiscard]] AnglePair angle_between(const CoeffVector& v, const CoeffVector& w);

enum class AngleClass { Big, ModeratelySmall, UltraSmall };

[[nodiscard]] const char* to_string(AngleClass c);

/// Big iff sin >= 1/(r h); otherwise UltraSmall iff sin < 1/(r^2 h h'); else ModeratelySmall.
/// h >= h' are the ordered heights; requires 0 < r < 1 and h' >= 1.
[[nodiscard]] AngleClass classify_angle(double sin_alpha, double r, Int h, Int h_prime);
[[nodiscard]] AngleClass classify_angle(const AnglePair& pair, double r);

}  // namespace sqapprox
