#pragma once

// Approximating functions, the strips sigma_a(c) = {x : |a^2.x - c^2| < psi(h_a)},
// regions of the unit cube, and point-wise solution search.

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sqapprox/exact.hpp"
#include "sqapprox/lattice.hpp"

namespace sqapprox {

/// psi(h) = scale * h^{-exponent}.
struct PowerLaw {
  double exponent = 1.0;
  double scale = 1.0;
};

/// Right-continuous step function through tabulated (h, psi(h)) pairs.
///
/// The table must start at h = 1, be non-increasing and strictly positive,
/// and end strictly below its first value. Heights past the last entry are
/// outside the function's domain.
struct PsiTable {
  std::vector<std::pair<Int, double>> points;
};

/// Monotone positive approximating function psi with psi(h) -> 0.
class ApproxFunction {
 public:
  explicit ApproxFunction(PowerLaw p);
  explicit ApproxFunction(PsiTable t);

  static ApproxFunction power_law(double exponent, double scale = 1.0) {
    return ApproxFunction(PowerLaw{exponent, scale});
  }
  /// Reads a two-column CSV (h, psi); a non-numeric first line is taken as a header.
  static ApproxFunction load_table(const std::filesystem::path& path);
  /// "pow:<v>" or "table:<path>".
  static ApproxFunction parse(const std::string& spec);

  [[nodiscard]] double operator()(Int h) const;
  [[nodiscard]] bool is_power_law() const { return std::holds_alternative<PowerLaw>(kind_); }
  [[nodiscard]] const PowerLaw* power_law_params() const { return std::get_if<PowerLaw>(&kind_); }
  /// Largest h accepted (unbounded for power laws).
  [[nodiscard]] std::optional<Int> max_height() const;
  [[nodiscard]] std::string describe() const;

 private:
  std::variant<PowerLaw, PsiTable> kind_;
};

/// psi(h); h = 0 is rejected.
[[nodiscard]] double psi_eval(const ApproxFunction& f, Int h);

/// min over r in [ceil(r_max/2), r_max] of -log psi(2^r) / (r log 2), a finite proxy
/// for the lower order of 1/psi(2^r). Exactly the exponent for power laws.
[[nodiscard]] double lower_order(const ApproxFunction& f, int r_max);

/// Same proxy for an arbitrary sequence r -> psi(2^r), monotone or not.
[[nodiscard]] double lower_order(const std::function<double(int)>& psi_at_dyadic, int r_max);

/// sigma_a(c) with half-width measured in linear-form units.
struct Strip {
  CoeffVector a;
  Int c = 0;
  double half_width = 0.0;

  Strip(CoeffVector a_, Int c_, double half_width_);
  Strip(CoeffVector a_, Int c_, const ApproxFunction& f);

  /// Euclidean distance between the bounding hyperplanes: 2 psi / |a^2|.
  [[nodiscard]] double thickness() const;
};

struct UnitCube {
  std::size_t n = 2;
};

/// Omega = [eps, 1]^n.
struct ShavedCube {
  double eps = 0.25;
  std::size_t n = 2;
};

/// Open ball B(center, radius) lying inside [eps, 1]^n.
struct Ball {
  std::vector<double> center;
  double radius = 0.2;
  double eps = 0.25;

  /// The default ball: center (0.5, ..., 0.5), r = 0.2, eps = 0.25.
  static Ball standard(std::size_t n);
  [[nodiscard]] double volume() const;
};

using Region = std::variant<UnitCube, ShavedCube, Ball>;

[[nodiscard]] std::size_t region_dim(const Region& r);
/// Checks the region's invariants; throws DomainError.
void validate_region(const Region& r);
/// Axis-aligned bounding box [lo, hi]^n (the same interval on every axis for cubes;
/// per-axis for balls).
[[nodiscard]] std::pair<std::vector<double>, std::vector<double>> region_bounds(const Region& r);
[[nodiscard]] bool region_contains(const Region& r, std::span<const double> x);
/// Exact Lebesgue measure of the region.
[[nodiscard]] double region_volume(const Region& r);

/// |a^2.x - c^2| < half_width. Decisions within a few ulps of the boundary are
/// re-made exactly, treating the doubles of x as the dyadic rationals they are.
[[nodiscard]] bool strip_contains(const Strip& s, std::span<const double> x);
/// Fully exact membership for rational points.
[[nodiscard]] bool strip_contains(const Strip& s, std::span<const Rational> x);

/// Exact sign-aware test |a^2.x - c^2| < half_width shared by the strip and union tests.
[[nodiscard]] bool linear_form_within(std::span<const Int> a, Int c, std::span<const double> x,
                                      double half_width);

/// Range of c for which the hyperplane a^2.x = c^2 meets a ball.
struct CInterval {
  double c_lo = 0.0;
  double c_hi = 0.0;
  double length = 0.0;  ///< xi = c_hi - c_lo
};

/// [sqrt(max(0, a^2.x0 - r|a^2|)), sqrt(a^2.x0 + r|a^2|)] for the ball center x0.
[[nodiscard]] CInterval admissible_c_interval(const CoeffVector& a, const Ball& ball);

/// Integer candidates c_min..c_max (inclusive) whose strip of the given half-width
/// can meet the ball; widens the line-hitting interval by the strip width.
[[nodiscard]] std::pair<Int, Int> candidate_c_range(const CoeffVector& a, const Ball& ball, double half_width);

/// Integers c >= 0 with c^2 in (t - hw, t + hw) are contained in the returned inclusive range.
[[nodiscard]] std::pair<Int, Int> square_window(double t, double half_width);

struct Solution {
  CoeffVector a;
  Int c = 0;
  double residual = 0.0;  ///< |a^2.x - c^2|
};

/// Every (a, c) with 1 <= h_a <= h_max, c >= 0 and |a^2.x - c^2| < psi(h_a),
/// ordered by (h_a, a lexicographic, c).
[[nodiscard]] std::vector<Solution> solutions_at_point(std::span<const double> x, const ApproxFunction& f,
                                                       Int h_max);

}  // namespace sqapprox
