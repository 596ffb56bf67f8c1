#pragma once

// Fourier treatment of the periodic inhomogeneous wave equation
//
//   u_tt - Δu = f,   u and f periodic with periods alpha_i in x_i and beta in t,
//
// in the basis exp(2πi (Σ a_i x_i/alpha_i + b t/beta)). A mode (a, b) is
// multiplied by (4π²/β²)·D(a, b) where D = Σ a_i² δ_i - b², δ_i = β²/α_i².

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqapprox/errors.hpp"
#include "sqapprox/exact.hpp"

namespace sqapprox {

/// A positive real given either as a double or as an exact rational.
struct ExactReal {
  double value = 0.0;
  std::optional<Rational> exact;

  ExactReal() = default;
  ExactReal(double v);  // NOLINT(google-explicit-constructor)
  ExactReal(const Rational& r);  // NOLINT(google-explicit-constructor)

  /// "p/q" or an integer is exact; anything else is parsed as a double.
  static ExactReal parse(const std::string& text);
  [[nodiscard]] bool is_exact() const { return exact.has_value(); }
  [[nodiscard]] std::string str() const;
};

/// Spatial periods alpha_i and temporal period beta. Immutable: the ratios
/// δ_i = β²/α_i² are fixed at construction and never go stale.
class WaveParams {
 public:
  static WaveParams from_alphas(const std::vector<ExactReal>& alphas, const ExactReal& beta);
  /// alpha_i = beta / sqrt(δ_i); δ_i are kept verbatim.
  static WaveParams from_deltas(const std::vector<ExactReal>& deltas, const ExactReal& beta = ExactReal(1.0));
  /// {"alphas": [...], "beta": x} or {"deltas": [...], "beta": x}; each number may be
  /// written as {"num": p, "den": q}.
  static WaveParams from_json(const std::string& text);

  [[nodiscard]] std::size_t dim() const { return deltas_.size(); }
  [[nodiscard]] const std::vector<ExactReal>& deltas() const { return deltas_; }
  [[nodiscard]] const std::vector<ExactReal>& alpha_squares() const { return alpha_sq_; }
  [[nodiscard]] const ExactReal& beta() const { return beta_; }
  [[nodiscard]] double beta_squared() const { return beta_.value * beta_.value; }
  [[nodiscard]] double alpha(std::size_t i) const;
  /// True when every δ_i is an exact rational.
  [[nodiscard]] bool exact() const;
  [[nodiscard]] std::string to_json() const;

 private:
  WaveParams() = default;
  std::vector<ExactReal> alpha_sq_;
  std::vector<ExactReal> deltas_;
  ExactReal beta_;
};

/// Mode index (a, b) in Z^n x Z.
struct Mode {
  std::vector<Int> a;
  Int b = 0;

  [[nodiscard]] Int height() const;
  [[nodiscard]] Mode negated() const;
};

/// Order by (h_a, a lexicographic, b).
struct ModeOrder {
  bool operator()(const Mode& l, const Mode& r) const;
};

using Complex = std::complex<double>;

/// Sparse field of Fourier coefficients.
class FourierField {
 public:
  explicit FourierField(std::size_t n) : n_(n) {}

  void set(const Mode& m, Complex value);
  [[nodiscard]] Complex get(const Mode& m) const;
  [[nodiscard]] std::size_t dim() const { return n_; }
  [[nodiscard]] std::size_t size() const { return modes_.size(); }
  [[nodiscard]] const std::map<Mode, Complex, ModeOrder>& modes() const { return modes_; }
  /// Largest h_a present.
  [[nodiscard]] Int band_limit() const;
  /// Coefficient at (-a,-b) is bitwise the conjugate of the one at (a,b) for every stored mode.
  [[nodiscard]] bool is_hermitian() const;
  /// Σ |coefficient|: a bound on the field's sup norm.
  [[nodiscard]] double l1_norm() const;

  /// One JSON object per line: {"a":[...],"b":int,"re":float,"im":float}.
  static FourierField read_json_lines(std::istream& in, std::optional<std::size_t> n = std::nullopt);
  void write_json_lines(std::ostream& out) const;

 private:
  std::size_t n_;
  std::map<Mode, Complex, ModeOrder> modes_;
};

class NonZeroMeanSource : public Error {
 public:
  NonZeroMeanSource() : Error("source has a nonzero (0,0) mode; the periodic problem is unsolvable") {}
};

class ResonantMode : public Error {
 public:
  explicit ResonantMode(Mode m);
  Mode mode;
};

class NearResonance : public Error {
 public:
  NearResonance(Mode m, double d);
  Mode mode;
  double denominator;
};

/// D = Σ a_i² δ_i - b², summed left to right in double precision.
[[nodiscard]] double denominator(const WaveParams& params, const std::vector<Int>& a, Int b);
/// D in exact arithmetic; empty unless every δ_i is rational.
[[nodiscard]] std::optional<Rational> denominator_exact(const WaveParams& params, const std::vector<Int>& a, Int b);

/// u_{a,b} = (β²/4π²) f_{a,b}/D, with u_{0,0} = 0.
[[nodiscard]] FourierField solve_wave(const FourierField& f, const WaveParams& params,
                                      double min_denominator = 1e-8);

/// f_{a,b} = (4π²/β²) D u_{a,b}: the Fourier image of u_tt - Δu.
[[nodiscard]] FourierField apply_operator(const FourierField& u, const WaveParams& params);

/// max |u_tt - Δu - f| over the space-time grid x_i = α_i k_i/N, t = β k_t/N, k in [0, N),
/// summing the differentiated series directly.
[[nodiscard]] double residual_check(const FourierField& u, const FourierField& f, const WaveParams& params,
                                    int samples_per_axis = 16);

struct ResonanceScanConfig {
  double C = 1.0;
  double w = 2.0;
  Int h_max = 16;

  void validate() const;
};

struct Resonance {
  std::vector<Int> a;
  Int b = 0;
  double D = 0.0;
  std::optional<Rational> D_exact;
  double threshold = 0.0;  ///< C h_a^{-w}
  double margin = 0.0;     ///< threshold - |D|

  [[nodiscard]] Int height() const;
  friend bool operator==(const Resonance&, const Resonance&) = default;
};

/// All (a, b) with a in Z^n, 1 <= h_a <= h_max, b in Z and |D| < C h_a^{-w}, sorted by
/// margin (largest first), then (h_a, a, b). Decisions are exact when every δ_i is rational.
[[nodiscard]] std::vector<Resonance> resonance_scan(const WaveParams& params, const ResonanceScanConfig& cfg);

/// The comparison order used by resonance_scan.
[[nodiscard]] bool resonance_before(const Resonance& l, const Resonance& r);

}  // namespace sqapprox
