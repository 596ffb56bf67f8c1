#include "sqapprox/wave.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace sqapprox {

namespace {

using json = nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFourPiSq = kTwoPi * kTwoPi;

void require_positive(const ExactReal& v, const char* what) {
  if (!(v.value > 0.0) || !std::isfinite(v.value)) throw DomainError(std::string(what) + " must be positive");
  if (v.exact && v.exact->sign() <= 0) throw DomainError(std::string(what) + " must be positive");
}

ExactReal square(const ExactReal& v) {
  if (v.exact) return ExactReal(*v.exact * *v.exact);
  return ExactReal(v.value * v.value);
}

ExactReal divide(const ExactReal& num, const ExactReal& den) {
  if (num.exact && den.exact) return ExactReal(*num.exact / *den.exact);
  return ExactReal(num.value / den.value);
}

ExactReal real_from_json(const json& j) {
  if (j.is_object()) {
    if (!j.contains("num") || !j.contains("den")) throw DomainError("exact numbers need \"num\" and \"den\"");
    const auto p = j.at("num").get<Int>();
    const auto q = j.at("den").get<Int>();
    if (q == 0) throw DomainError("exact number with zero denominator");
    return ExactReal(Rational(p, q));
  }
  if (j.is_number_integer()) return ExactReal(Rational(j.get<Int>()));
  if (j.is_number()) return ExactReal(j.get<double>());
  throw DomainError("expected a number or {\"num\":p,\"den\":q}");
}

json real_to_json(const ExactReal& v) {
  if (v.exact) {
    if (v.exact->den() == 1) return static_cast<Int>(v.exact->num());
    return json{{"num", static_cast<Int>(v.exact->num())}, {"den", static_cast<Int>(v.exact->den())}};
  }
  return v.value;
}

}  // namespace

ExactReal::ExactReal(double v) : value(v) {}

ExactReal::ExactReal(const Rational& r) : value(r.to_double()), exact(r) {}

ExactReal ExactReal::parse(const std::string& text) {
  const bool rational_text =
      !text.empty() && text.find_first_not_of("+-0123456789/") == std::string::npos;
  if (rational_text) return ExactReal(Rational::parse(text));
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return ExactReal(v);
  } catch (const std::exception&) {
  }
  throw DomainError("malformed number: '" + text + "'");
}

std::string ExactReal::str() const {
  if (exact) return exact->str();
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

WaveParams WaveParams::from_alphas(const std::vector<ExactReal>& alphas, const ExactReal& beta) {
  if (alphas.empty()) throw DomainError("wave parameters need at least one spatial period");
  require_positive(beta, "beta");
  WaveParams p;
  p.beta_ = beta;
  const ExactReal beta_sq = square(beta);
  for (const auto& a : alphas) {
    require_positive(a, "alpha");
    p.alpha_sq_.push_back(square(a));
    p.deltas_.push_back(divide(beta_sq, p.alpha_sq_.back()));
  }
  return p;
}

WaveParams WaveParams::from_deltas(const std::vector<ExactReal>& deltas, const ExactReal& beta) {
  if (deltas.empty()) throw DomainError("wave parameters need at least one ratio delta");
  require_positive(beta, "beta");
  WaveParams p;
  p.beta_ = beta;
  const ExactReal beta_sq = square(beta);
  for (const auto& d : deltas) {
    require_positive(d, "delta");
    p.deltas_.push_back(d);
    p.alpha_sq_.push_back(divide(beta_sq, d));
  }
  return p;
}

WaveParams WaveParams::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed wave parameter JSON: ") + e.what());
  }
  try {
    const ExactReal beta = j.contains("beta") ? real_from_json(j.at("beta")) : ExactReal(Rational(1));
    std::vector<ExactReal> values;
    if (j.contains("alphas") == j.contains("deltas")) {
      throw DomainError("wave parameter JSON needs exactly one of \"alphas\" or \"deltas\"");
    }
    const bool by_alpha = j.contains("alphas");
    for (const auto& v : j.at(by_alpha ? "alphas" : "deltas")) values.push_back(real_from_json(v));
    return by_alpha ? from_alphas(values, beta) : from_deltas(values, beta);
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed wave parameter JSON: ") + e.what());
  }
}

double WaveParams::alpha(std::size_t i) const { return std::sqrt(alpha_sq_.at(i).value); }

bool WaveParams::exact() const {
  return std::all_of(deltas_.begin(), deltas_.end(), [](const ExactReal& d) { return d.is_exact(); });
}

std::string WaveParams::to_json() const {
  json j;
  j["beta"] = real_to_json(beta_);
  j["deltas"] = json::array();
  for (const auto& d : deltas_) j["deltas"].push_back(real_to_json(d));
  return j.dump();
}

Int Mode::height() const {
  Int h = 0;
  for (Int v : a) h = std::max(h, v < 0 ? -v : v);
  return h;
}

Mode Mode::negated() const {
  Mode m{a, -b};
  for (auto& v : m.a) v = -v;
  return m;
}

bool ModeOrder::operator()(const Mode& l, const Mode& r) const {
  const Int hl = l.height();
  const Int hr = r.height();
  if (hl != hr) return hl < hr;
  if (l.a != r.a) return l.a < r.a;
  return l.b < r.b;
}

void FourierField::set(const Mode& m, Complex value) {
  if (m.a.size() != n_) throw DomainError("mode dimension does not match field");
  modes_[m] = value;
}

Complex FourierField::get(const Mode& m) const {
  auto it = modes_.find(m);
  return it == modes_.end() ? Complex{} : it->second;
}

Int FourierField::band_limit() const {
  Int h = 0;
  for (const auto& [m, v] : modes_) h = std::max(h, m.height());
  return h;
}

bool FourierField::is_hermitian() const {
  for (const auto& [m, v] : modes_) {
    auto it = modes_.find(m.negated());
    const Complex partner = it == modes_.end() ? Complex{} : it->second;
    const Complex conj = std::conj(v);
    // Bitwise comparison of the components (distinguishes -0.0 only through value equality).
    if (partner.real() != conj.real() || partner.imag() != conj.imag()) return false;
  }
  return true;
}

double FourierField::l1_norm() const {
  double s = 0.0;
  for (const auto& [m, v] : modes_) s += std::abs(v);
  return s;
}

FourierField FourierField::read_json_lines(std::istream& in, std::optional<std::size_t> n) {
  std::optional<FourierField> field;
  if (n) field.emplace(*n);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Mode m{j.at("a").get<std::vector<Int>>(), j.at("b").get<Int>()};
      if (!field) field.emplace(m.a.size());
      field->set(m, Complex(j.at("re").get<double>(), j.value("im", 0.0)));
    } catch (const json::exception& e) {
      throw DomainError("malformed field line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DomainError& e) {
      throw DomainError("malformed field line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!field) throw DomainError("empty field file and no dimension given");
  return *field;
}

void FourierField::write_json_lines(std::ostream& out) const {
  for (const auto& [m, v] : modes_) {
    json j;
    j["a"] = m.a;
    j["b"] = m.b;
    j["re"] = v.real();
    j["im"] = v.imag();
    out << j.dump() << '\n';
  }
}

namespace {

std::string mode_text(const Mode& m) {
  std::string s = "a=(";
  for (std::size_t i = 0; i < m.a.size(); ++i) s += (i ? "," : "") + std::to_string(m.a[i]);
  return s + "), b=" + std::to_string(m.b);
}

}  // namespace

ResonantMode::ResonantMode(Mode m) : Error("resonant mode " + mode_text(m) + ": D = 0"), mode(std::move(m)) {}

NearResonance::NearResonance(Mode m, double d)
    : Error("near-resonant mode " + mode_text(m) + ": |D| = " + std::to_string(std::fabs(d)) +
            " is below the minimum denominator"),
      mode(std::move(m)),
      denominator(d) {}

double denominator(const WaveParams& params, const std::vector<Int>& a, Int b) {
  if (a.size() != params.dim()) throw DomainError("mode dimension does not match wave parameters");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(a[i]) * params.deltas()[i].value;
  }
  return s - static_cast<double>(b) * static_cast<double>(b);
}

std::optional<Rational> denominator_exact(const WaveParams& params, const std::vector<Int>& a, Int b) {
  if (a.size() != params.dim()) throw DomainError("mode dimension does not match wave parameters");
  if (!params.exact()) return std::nullopt;
  Rational s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s = s + Rational(exact::mul(a[i], a[i])) * *params.deltas()[i].exact;
  return s - Rational(exact::mul(b, b));
}

namespace {

/// D as a double; when exact arithmetic is available, its value is the exact D rounded.
double mode_denominator(const WaveParams& params, const Mode& m, bool& is_zero) {
  if (auto d = denominator_exact(params, m.a, m.b)) {
    is_zero = d->is_zero();
    return d->to_double();
  }
  const double d = denominator(params, m.a, m.b);
  is_zero = d == 0.0;
  return d;
}

bool is_mean_mode(const Mode& m) {
  return m.b == 0 && std::all_of(m.a.begin(), m.a.end(), [](Int v) { return v == 0; });
}

}  // namespace

FourierField solve_wave(const FourierField& f, const WaveParams& params, double min_denominator) {
  if (f.dim() != params.dim()) throw DomainError("field dimension does not match wave parameters");
  if (!(min_denominator >= 0.0)) throw DomainError("minimum denominator must be >= 0");
  FourierField u(f.dim());
  const double prefactor = params.beta_squared() / kFourPiSq;
  for (const auto& [m, v] : f.modes()) {
    if (is_mean_mode(m)) {
      if (v != Complex{}) throw NonZeroMeanSource();
      u.set(m, Complex{});
      continue;
    }
    if (v == Complex{}) {
      u.set(m, Complex{});
      continue;
    }
    bool zero = false;
    const double d = mode_denominator(params, m, zero);
    if (zero) throw ResonantMode(m);
    if (std::fabs(d) < min_denominator) throw NearResonance(m, d);
    const double factor = prefactor / d;
    u.set(m, Complex(v.real() * factor, v.imag() * factor));
  }
  return u;
}

FourierField apply_operator(const FourierField& u, const WaveParams& params) {
  if (u.dim() != params.dim()) throw DomainError("field dimension does not match wave parameters");
  FourierField f(u.dim());
  const double prefactor = kFourPiSq / params.beta_squared();
  for (const auto& [m, v] : u.modes()) {
    bool zero = false;
    const double d = mode_denominator(params, m, zero);
    const double factor = prefactor * d;
    f.set(m, Complex(v.real() * factor, v.imag() * factor));
  }
  return f;
}

double residual_check(const FourierField& u, const FourierField& f, const WaveParams& params,
                      int samples_per_axis) {
  if (u.dim() != params.dim() || f.dim() != params.dim()) {
    throw DomainError("field dimension does not match wave parameters");
  }
  if (samples_per_axis < 1) throw DomainError("residual grid needs at least one sample per axis");
  const std::size_t n = params.dim();
  const Int N = samples_per_axis;

  // The multiplier of u_tt - Δu on each u mode, computed from the periods directly.
  struct Term {
    const Mode* mode;
    Complex coeff;
  };
  std::vector<Term> terms;
  for (const auto& [m, v] : u.modes()) {
    double mult = -(kTwoPi * static_cast<double>(m.b)) * (kTwoPi * static_cast<double>(m.b)) / params.beta_squared();
    for (std::size_t i = 0; i < n; ++i) {
      const double k = kTwoPi * static_cast<double>(m.a[i]);
      mult += k * k / params.alpha_squares()[i].value;
    }
    terms.push_back({&m, v * mult});
  }
  for (const auto& [m, v] : f.modes()) terms.push_back({&m, -v});

  std::size_t points = 1;
  for (std::size_t i = 0; i <= n; ++i) points *= static_cast<std::size_t>(N);
  std::vector<Int> k(n + 1, 0);
  double worst = 0.0;
  for (std::size_t p = 0; p < points; ++p) {
    std::size_t rem = p;
    for (std::size_t i = 0; i <= n; ++i) {
      k[i] = static_cast<Int>(rem % static_cast<std::size_t>(N));
      rem /= static_cast<std::size_t>(N);
    }
    Complex total{};
    for (const auto& t : terms) {
      // Phase Σ a_i x_i/α_i + b t/β = (Σ a_i k_i + b k_t)/N, reduced exactly modulo N.
      Wide phase = exact::mul(t.mode->b, k[n]);
      for (std::size_t i = 0; i < n; ++i) phase = exact::add(phase, exact::mul(t.mode->a[i], k[i]));
      phase %= N;
      if (phase < 0) phase += N;
      const double angle = kTwoPi * static_cast<double>(phase) / static_cast<double>(N);
      total += t.coeff * Complex(std::cos(angle), std::sin(angle));
    }
    worst = std::max(worst, std::abs(total));
  }
  return worst;
}

void ResonanceScanConfig::validate() const {
  if (!(C >= 0.0) || !std::isfinite(C)) throw DomainError("resonance constant C must be >= 0");
  if (!(w > 1.0) || !std::isfinite(w)) throw DomainError("resonance exponent w must be > 1");
  if (h_max < 1) throw DomainError("resonance scan needs h_max >= 1");
}

Int Resonance::height() const {
  Int h = 0;
  for (Int v : a) h = std::max(h, v < 0 ? -v : v);
  return h;
}

bool resonance_before(const Resonance& l, const Resonance& r) {
  if (l.margin != r.margin) return l.margin > r.margin;
  const Int hl = l.height();
  const Int hr = r.height();
  if (hl != hr) return hl < hr;
  if (l.a != r.a) return l.a < r.a;
  return l.b < r.b;
}

std::vector<Resonance> resonance_scan(const WaveParams& params, const ResonanceScanConfig& cfg) {
  cfg.validate();
  const std::size_t n = params.dim();
  (void)exact::mul64(exact::mul64(cfg.h_max, cfg.h_max), static_cast<Int>(n));
  std::vector<Resonance> out;
  if (cfg.C == 0.0) return out;
  const bool use_exact = params.exact();

  std::vector<Int> a(n, -cfg.h_max);
  while (true) {
    Int h = 0;
    for (Int v : a) h = std::max(h, v < 0 ? -v : v);
    if (h > 0) {
      const double thr = cfg.C * std::pow(static_cast<double>(h), -cfg.w);
      // |D| < thr forces b^2 in (S - thr, S + thr) with S = Σ a_i² δ_i.
      const double s = denominator(params, a, 0);
      const double b_hi_f = std::sqrt(std::max(0.0, s + thr));
      const Int b_lo = std::max<Int>(0, static_cast<Int>(std::floor(std::sqrt(std::max(0.0, s - thr)))) - 1);
      const Int b_hi = static_cast<Int>(std::ceil(b_hi_f)) + 1;
      for (Int bb = b_lo; bb <= b_hi; ++bb) {
        const std::vector<Int> signed_b = bb == 0 ? std::vector<Int>{0} : std::vector<Int>{-bb, bb};
        for (Int b : signed_b) {
          Resonance r{a, b, denominator(params, a, b), std::nullopt, thr, 0.0};
          bool hit = false;
          if (use_exact) {
            r.D_exact = denominator_exact(params, a, b);
            r.D = r.D_exact->to_double();
            hit = r.D_exact->abs().compare(thr) == std::strong_ordering::less;
          } else {
            hit = std::fabs(r.D) < thr;
          }
          if (hit) {
            r.margin = thr - std::fabs(r.D);
            out.push_back(std::move(r));
          }
        }
      }
    }
    std::size_t i = n;
    while (i > 0 && a[i - 1] == cfg.h_max) a[--i] = -cfg.h_max;
    if (i == 0) break;
    ++a[i - 1];
  }
  std::sort(out.begin(), out.end(), resonance_before);
  return out;
}

}  // namespace sqapprox
