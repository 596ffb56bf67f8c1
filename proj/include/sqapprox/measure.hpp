#pragma once

// Grid estimates of Lebesgue measure for unions and intersections of strips,
// the Borel-Cantelli statistics S1/S2, the convergence criteria for the
// Lebesgue and Hausdorff dichotomies, the dimension formula, and a
// box-counting dimension estimator.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqapprox/exact.hpp"
#include "sqapprox/lattice.hpp"
#include "sqapprox/strips.hpp"

namespace sqapprox {

enum class SampleKind {
  CellCenter,  ///< one sample at each cell center
  Subsample,   ///< k^n samples per cell on a regular sub-lattice
  RowExact,    ///< rows at cell centers in axes 1..n-1, exact interval lengths along axis 0
};

struct SampleRule {
  SampleKind kind = SampleKind::CellCenter;
  int per_axis = 1;  ///< k for Subsample

  static SampleRule center() { return {}; }
  static SampleRule subsample(int k) { return {SampleKind::Subsample, k}; }
  static SampleRule rows() { return {SampleKind::RowExact, 1}; }
  [[nodiscard]] std::string describe() const;
  static SampleRule parse(const std::string& text);  ///< "center", "sub:<k>", "rows"
};

/// Discretization laid over the bounding box of the region being measured.
struct GridSpec {
  int resolution = 256;  ///< cells per axis, a power of two >= 16
  SampleRule rule;
  std::uint64_t max_cells = std::uint64_t{1} << 34;
  unsigned threads = 1;  ///< never changes results

  void validate(std::size_t n) const;
};

struct MeasureEstimate {
  double value = 0.0;
  /// Some strip is thinner than two sample spacings (sampling rules only).
  bool coarse_warning = false;
  double min_thickness = 0.0;
  double sample_spacing = 0.0;
};

/// A single strip sigma_a(c), or the union over all c >= 0 when `only_c` is empty.
struct StripFamily {
  CoeffVector a;
  double half_width = 0.0;
  std::optional<Int> only_c;

  static StripFamily all_c(CoeffVector a, const ApproxFunction& f);
  static StripFamily single(const Strip& s);

  [[nodiscard]] bool contains(std::span<const double> x) const;
  [[nodiscard]] double thickness() const;
};

/// |region ∩ (∪ sets)|.
[[nodiscard]] MeasureEstimate estimate_measure(std::span<const Strip> sets, const Region& region,
                                               const GridSpec& grid);
[[nodiscard]] MeasureEstimate estimate_union_measure(std::span<const StripFamily> sets, const Region& region,
                                                     const GridSpec& grid);
[[nodiscard]] MeasureEstimate estimate_intersection_measure(const StripFamily& first, const StripFamily& second,
                                                            const Region& region, const GridSpec& grid);

/// Constants of the two-sided bound c1 |B| psi/h <= |sigma_a ∩ B| <= c2 |B| psi/h.
[[nodiscard]] double sandwich_c1();
[[nodiscard]] double sandwich_c2(double eps);

struct SandwichEstimate {
  MeasureEstimate estimate;
  double lower = 0.0;  ///< c1 |B| psi(h)/h
  double upper = 0.0;  ///< c2 |B| psi(h)/h
  [[nodiscard]] bool within() const { return estimate.value >= lower && estimate.value <= upper; }
};

/// |(∪_c sigma_a(c)) ∩ B| with the sandwich bounds for the ball's eps.
[[nodiscard]] SandwichEstimate union_measure_over_c(const CoeffVector& a, const ApproxFunction& f, const Ball& ball,
                                                    const GridSpec& grid);

/// |sigma_a ∩ sigma_a' ∩ B| for distinct sieved vectors.
[[nodiscard]] MeasureEstimate pairwise_intersection_measure(const CoeffVector& a, const CoeffVector& a_prime,
                                                            const ApproxFunction& f, const Ball& ball,
                                                            const GridSpec& grid);

/// All pairwise intersection measures of sigma_a ∩ B for a list of vectors.
struct PairwiseTable {
  std::vector<double> diagonal;  ///< |sigma_{v_i} ∩ B|
  /// |sigma_{v_i} ∩ sigma_{v_j} ∩ B| for i < j, packed row-major.
  std::vector<double> upper;
  bool coarse_warning = false;

  [[nodiscard]] std::size_t size() const { return diagonal.size(); }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const;
};

[[nodiscard]] PairwiseTable pairwise_intersections(std::span<const CoeffVector> vectors, const ApproxFunction& f,
                                                   const Ball& ball, const GridSpec& grid);

struct BCStatistics {
  double S1 = 0.0;
  double S2 = 0.0;
  std::optional<double> ratio;  ///< S1^2 / S2; empty when there is no data (S2 = 0)
  std::size_t vector_count = 0;
  bool coarse_warning = false;

  [[nodiscard]] bool no_data() const { return !ratio.has_value(); }
};

/// S1 = sum |sigma_a ∩ B| and S2 = sum over ordered pairs (diagonal included) of
/// |sigma_a ∩ sigma_a' ∩ B|, over sieved a with h_a <= H.
[[nodiscard]] BCStatistics bc_statistics(Int H, const ApproxFunction& f, const Ball& ball, const GridSpec& grid,
                                         const SieveConfig& sieve = {});

/// |E ∩ region| for E = ∪ {sigma_a : a in Z>=0^n, h_lo <= h_a <= h_hi}.
[[nodiscard]] MeasureEstimate window_union_measure(const ApproxFunction& f, std::size_t n, Int h_lo, Int h_hi,
                                                   const Region& region, const GridSpec& grid);

// ---------------------------------------------------------------------------
// Series criteria and dimension

enum class Verdict { Converging, Diverging, Inconclusive };

[[nodiscard]] const char* to_string(Verdict v);

struct PartialSum {
  Int H = 0;
  double sum = 0.0;
};

struct HausdorffPartialSum {
  Int H = 0;
  double s = 0.0;
  double sum = 0.0;
};

struct DichotomyReport {
  std::vector<PartialSum> partial_sums;
  Verdict verdict_hint = Verdict::Inconclusive;
  std::vector<HausdorffPartialSum> hausdorff_sums;
  std::vector<double> block_sums;  ///< sums over complete dyadic blocks [2^j, 2^{j+1})
};

/// Hint from dyadic block sums: Converging if the last ratios are all < 0.9,
/// Diverging if they are all >= 0.99 (non-decreasing up to 1%), else Inconclusive.
[[nodiscard]] Verdict block_verdict(std::span<const double> blocks);

/// Partial sums of sum_{h<=H} h^{n-2} psi(h) at H in {1, 2, 4, ...} and at H itself.
[[nodiscard]] DichotomyReport khintchine_sum(const ApproxFunction& f, std::size_t n, Int H);

/// Partial sums of sum_{h<=H} psi(h)^{s-(n-1)} h^{3n-2-2s}; requires n-1 < s < n.
[[nodiscard]] DichotomyReport hausdorff_sum(const ApproxFunction& f, std::size_t n, double s, Int H);

/// Exponent e of the term h^e of the Hausdorff series for psi = h^{-v}: -v(s-(n-1)) + 3n-2-2s.
[[nodiscard]] Rational hausdorff_term_exponent(const Rational& v, std::size_t n, const Rational& s);
/// (n-1) + (n+1)/(2+v): the s at which the Hausdorff series for h^{-v} turns harmonic.
[[nodiscard]] Rational critical_exponent_s(const Rational& v, std::size_t n);
/// sum h^e converges iff e < -1.
[[nodiscard]] bool power_series_converges(const Rational& exponent);

/// (n-1) + (n+1)/(2+lambda), valid for lambda >= n-1 (lambda = +inf gives n-1).
[[nodiscard]] double predicted_dimension(double lambda, std::size_t n);

struct BoxCountPoint {
  int resolution = 0;
  double rho = 0.0;
  std::uint64_t occupied = 0;
  double resolved_fraction = 0.0;  ///< share of strips with thickness >= rho/2
  bool used_in_fit = false;
};

struct BoxCountResult {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<BoxCountPoint> points;
  std::vector<double> residuals;  ///< per fitted point, log N - fit
  bool filter_relaxed = false;    ///< fewer than 3 points passed the thickness filter; all were fitted
  bool saturated = false;         ///< every box at the finest resolution was occupied
  std::uint64_t strip_count = 0;
  std::uint64_t strips_rasterized = 0;
};

/// Box counts of a finite union of strips over [0,1]^n at power-of-two resolutions.
[[nodiscard]] BoxCountResult box_counting_dimension(std::span<const Strip> strips, std::span<const int> resolutions);

/// Box counts of E = ∪ {sigma_a(c) : h_lo <= h_a <= h_hi, c >= 0} over [0,1]^n.
///
/// This is a finite-resolution proxy: the fit keeps only resolutions at which
/// fewer than 1% of strips are at least half a box thick, and its bias grows
/// once boxes are small relative to strip thickness.
[[nodiscard]] BoxCountResult box_counting_dimension(const ApproxFunction& f, std::size_t n, Int h_lo, Int h_hi,
                                                    std::span<const int> resolutions);

}  // namespace sqapprox
