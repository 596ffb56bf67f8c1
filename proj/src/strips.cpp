#include "sqapprox/strips.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace sqapprox {

namespace {

void validate_table(const PsiTable& t) {
  if (t.points.empty()) throw DomainError("psi table is empty");
  if (t.points.front().first != 1) throw DomainError("psi table must start at h = 1");
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    const auto& [h, v] = t.points[i];
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("psi table values must be positive and finite");
    if (i > 0) {
      if (h <= t.points[i - 1].first) throw DomainError("psi table heights must increase strictly");
      if (v > t.points[i - 1].second) throw DomainError("psi table must be non-increasing");
    }
  }
  if (!(t.points.back().second < t.points.front().second)) {
    throw DomainError("psi table must decay: last value must lie below the first");
  }
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

}  // namespace

ApproxFunction::ApproxFunction(PowerLaw p) : kind_(p) {
  if (!(p.exponent > 0.0) || !std::isfinite(p.exponent)) throw DomainError("power-law exponent must be positive");
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) throw DomainError("power-law scale must be positive");
}

ApproxFunction::ApproxFunction(PsiTable t) : kind_(std::move(t)) { validate_table(std::get<PsiTable>(kind_)); }

ApproxFunction ApproxFunction::load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open psi table: " + path.string());
  PsiTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("psi table row needs two columns: " + line);
    std::string hs = trim(line.substr(0, comma));
    std::string vs = trim(line.substr(comma + 1));
    try {
      std::size_t used_h = 0;
      std::size_t used_v = 0;
      Int h = std::stoll(hs, &used_h);
      double v = std::stod(vs, &used_v);
      if (used_h != hs.size() || used_v != vs.size()) throw std::invalid_argument("trailing text");
      table.points.emplace_back(h, v);
    } catch (const std::exception&) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw DomainError("malformed psi table row: " + line);
    }
    first = false;
  }
  return ApproxFunction(std::move(table));
}

ApproxFunction ApproxFunction::parse(const std::string& spec) {
  if (spec.rfind("pow:", 0) == 0) {
    std::string body = spec.substr(4);
    double scale = 1.0;
    auto number = [&](const std::string& text) {
      try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
      } catch (const std::exception&) {
      }
      throw DomainError("malformed psi spec: " + spec);
    };
    if (auto star = body.find('*'); star != std::string::npos) {
      scale = number(body.substr(star + 1));
      body = body.substr(0, star);
    }
    const double v = number(body);
    return power_law(v, scale);
  }
  if (spec.rfind("table:", 0) == 0) return load_table(spec.substr(6));
  throw DomainError("psi spec must be pow:<v> or table:<path>, got '" + spec + "'");
}

double ApproxFunction::operator()(Int h) const {
  if (h < 1) throw DomainError("psi is defined for heights h >= 1");
  if (const auto* p = std::get_if<PowerLaw>(&kind_)) {
    double v = std::pow(static_cast<double>(h), -p->exponent);
    return p->scale == 1.0 ? v : p->scale * v;
  }
  const auto& pts = std::get<PsiTable>(kind_).points;
  if (h > pts.back().first) throw DomainError("height " + std::to_string(h) + " lies past the psi table");
  auto it = std::upper_bound(pts.begin(), pts.end(), h, [](Int x, const auto& p) { return x < p.first; });
  return std::prev(it)->second;
}

std::optional<Int> ApproxFunction::max_height() const {
  if (const auto* t = std::get_if<PsiTable>(&kind_)) return t->points.back().first;
  return std::nullopt;
}

std::string ApproxFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* p = std::get_if<PowerLaw>(&kind_)) {
    os << "pow:" << p->exponent;
    if (p->scale != 1.0) os << "*" << p->scale;
  } else {
    os << "table[" << std::get<PsiTable>(kind_).points.size() << "]";
  }
  return os.str();
}

double psi_eval(const ApproxFunction& f, Int h) { return f(h); }

double lower_order(const std::function<double(int)>& psi_at_dyadic, int r_max) {
  if (r_max < 4) throw DomainError("lower_order needs r_max >= 4");
  double best = std::numeric_limits<double>::infinity();
  for (int r = (r_max + 1) / 2; r <= r_max; ++r) {
    double v = -std::log(psi_at_dyadic(r)) / (r * std::numbers::ln2);
    best = std::min(best, v);
  }
  return best;
}

double lower_order(const ApproxFunction& f, int r_max) {
  if (r_max < 4) throw DomainError("lower_order needs r_max >= 4");
  if (const auto* p = f.power_law_params(); p != nullptr && p->scale == 1.0) return p->exponent;
  if (r_max > 62) throw OverflowError("2^r_max exceeds 64-bit heights");
  return lower_order([&](int r) { return f(Int{1} << r); }, r_max);
}

Strip::Strip(CoeffVector a_, Int c_, double half_width_) : a(std::move(a_)), c(c_), half_width(half_width_) {
  if (a.is_zero()) throw ZeroVectorError();
  if (c < 0) throw DomainError("strip right-hand side c must be >= 0");
  if (!(half_width >= 0.0)) throw DomainError("strip half-width must be >= 0");
}

Strip::Strip(CoeffVector a_, Int c_, const ApproxFunction& f) : Strip(a_, c_, f(a_.height())) {}

double Strip::thickness() const { return 2.0 * half_width / a.squared_norm(); }

Ball Ball::standard(std::size_t n) { return Ball{std::vector<double>(n, 0.5), 0.2, 0.25}; }

double Ball::volume() const {
  const double n = static_cast<double>(center.size());
  return std::pow(std::numbers::pi, n / 2.0) * std::pow(radius, n) / std::tgamma(n / 2.0 + 1.0);
}

std::size_t region_dim(const Region& r) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return v.center.size();
        } else {
          return v.n;
        }
      },
      r);
}

void validate_region(const Region& r) {
  if (region_dim(r) < 2) throw DomainError("regions need dimension n >= 2");
  if (const auto* s = std::get_if<ShavedCube>(&r)) {
    if (!(s->eps > 0.0 && s->eps < 1.0)) throw DomainError("shaved cube needs 0 < eps < 1");
  }
  if (const auto* b = std::get_if<Ball>(&r)) {
    if (!(b->eps > 0.0 && b->eps < 1.0)) throw DomainError("ball needs 0 < eps < 1");
    if (!(b->radius > 0.0 && b->radius < 1.0)) throw DomainError("ball radius must lie in (0, 1)");
    for (double x : b->center) {
      if (!(x > 0.0 && x < 1.0)) throw DomainError("ball center must lie in (0, 1)^n");
      if (x - b->radius < b->eps || x + b->radius > 1.0) throw DomainError("ball must lie inside [eps, 1]^n");
    }
  }
}

std::pair<std::vector<double>, std::vector<double>> region_bounds(const Region& r) {
  const std::size_t n = region_dim(r);
  if (const auto* b = std::get_if<Ball>(&r)) {
    std::vector<double> lo(n);
    std::vector<double> hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = b->center[i] - b->radius;
      hi[i] = b->center[i] + b->radius;
    }
    return {lo, hi};
  }
  double lo = 0.0;
  if (const auto* s = std::get_if<ShavedCube>(&r)) lo = s->eps;
  return {std::vector<double>(n, lo), std::vector<double>(n, 1.0)};
}

bool region_contains(const Region& r, std::span<const double> x) {
  if (const auto* b = std::get_if<Ball>(&r)) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - b->center[i]) * (x[i] - b->center[i]);
    return d2 < b->radius * b->radius;
  }
  double lo = 0.0;
  if (const auto* s = std::get_if<ShavedCube>(&r)) lo = s->eps;
  return std::all_of(x.begin(), x.end(), [&](double v) { return v >= lo && v <= 1.0; });
}

double region_volume(const Region& r) {
  if (const auto* b = std::get_if<Ball>(&r)) return b->volume();
  if (const auto* s = std::get_if<ShavedCube>(&r)) return std::pow(1.0 - s->eps, static_cast<double>(s->n));
  return 1.0;
}

bool linear_form_within(std::span<const Int> a, Int c, std::span<const double> x, double half_width) {
  long double t = 0;
  long double magnitude = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    long double term = static_cast<long double>(a[i]) * a[i] * x[i];
    t += term;
    magnitude += std::fabs(term);
  }
  const long double c2 = static_cast<long double>(c) * c;
  const long double d = std::fabs(t - c2);
  const long double slack = 64 * std::numeric_limits<long double>::epsilon() * (magnitude + c2 + 1);
  if (std::fabs(d - half_width) > slack) return d < half_width;
  try {
    Rational e(0);
    for (std::size_t i = 0; i < a.size(); ++i) e = e + Rational(exact::mul(a[i], a[i])) * Rational::from_double(x[i]);
    e = e - Rational(exact::mul(c, c));
    return e.abs().compare(half_width) == std::strong_ordering::less;
  } catch (const OverflowError&) {
    return d < half_width;
  }
}

bool strip_contains(const Strip& s, std::span<const double> x) {
  if (x.size() != s.a.dim()) throw DomainError("point dimension does not match strip");
  return linear_form_within(s.a.coords(), s.c, x, s.half_width);
}

bool strip_contains(const Strip& s, std::span<const Rational> x) {
  if (x.size() != s.a.dim()) throw DomainError("point dimension does not match strip");
  Rational e(0);
  for (std::size_t i = 0; i < x.size(); ++i) e = e + Rational(exact::mul(s.a[i], s.a[i])) * x[i];
  e = e - Rational(exact::mul(s.c, s.c));
  return e.abs().compare(s.half_width) == std::strong_ordering::less;
}

CInterval admissible_c_interval(const CoeffVector& a, const Ball& ball) {
  validate_region(ball);
  if (ball.center.size() != a.dim()) throw DomainError("ball dimension does not match vector");
  if (a.is_zero()) throw ZeroVectorError();
  long double t = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) t += static_cast<long double>(a[i]) * a[i] * ball.center[i];
  const long double spread = static_cast<long double>(ball.radius) * a.squared_norm();
  const long double lo_sq = t - spread;
  if (lo_sq < 0) throw DomainError("ball reaches the origin side of the strip family");
  CInterval out;
  out.c_lo = static_cast<double>(std::sqrt(lo_sq));
  out.c_hi = static_cast<double>(std::sqrt(t + spread));
  out.length = static_cast<double>(2 * spread / (std::sqrt(t + spread) + std::sqrt(lo_sq)));
  return out;
}

std::pair<Int, Int> square_window(double t, double half_width) {
  const long double lo = std::max(0.0L, static_cast<long double>(t) - half_width);
  const long double hi = static_cast<long double>(t) + half_width;
  // One integer of margin on each side absorbs rounding in the square roots.
  auto c_min = static_cast<Int>(std::floor(std::sqrt(lo)));
  auto c_max = static_cast<Int>(std::ceil(std::sqrt(hi)));
  return {std::max<Int>(0, c_min - 1), c_max + 1};
}

std::pair<Int, Int> candidate_c_range(const CoeffVector& a, const Ball& ball, double half_width) {
  validate_region(ball);
  long double t = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) t += static_cast<long double>(a[i]) * a[i] * ball.center[i];
  const long double spread = static_cast<long double>(ball.radius) * a.squared_norm();
  const long double lo = std::max(0.0L, t - spread - half_width);
  const long double hi = t + spread + half_width;
  return {static_cast<Int>(std::floor(std::sqrt(lo))), static_cast<Int>(std::ceil(std::sqrt(hi)))};
}

std::vector<Solution> solutions_at_point(std::span<const double> x, const ApproxFunction& f, Int h_max) {
  const std::size_t n = x.size();
  if (n < 2) throw DomainError("points need dimension n >= 2");
  if (h_max < 1) throw DomainError("solutions_at_point needs h_max >= 1");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("point must lie in the unit cube");
  }
  if (auto mh = f.max_height(); mh && *mh < h_max) throw DomainError("h_max lies past the psi table");

  std::vector<Solution> out;
  std::vector<Int> a(n, 0);
  std::vector<double> psi(static_cast<std::size_t>(h_max) + 1, 0.0);
  for (Int h = 1; h <= h_max; ++h) psi[h] = f(h);

  while (true) {
    std::size_t i = n;
    while (i > 0 && a[i - 1] == h_max) a[--i] = 0;
    if (i == 0) break;
    ++a[i - 1];

    const Int h = *std::max_element(a.begin(), a.end());
    long double t = 0;
    for (std::size_t k = 0; k < n; ++k) t += static_cast<long double>(a[k]) * a[k] * x[k];
    auto [c_min, c_max] = square_window(static_cast<double>(t), psi[h]);
    for (Int c = c_min; c <= c_max; ++c) {
      if (linear_form_within(a, c, x, psi[h])) {
        out.push_back({CoeffVector(a), c, static_cast<double>(std::fabs(t - static_cast<long double>(c) * c))});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Solution& l, const Solution& r) {
    if (l.a.height() != r.a.height()) return l.a.height() < r.a.height();
    if (l.a != r.a) return l.a < r.a;
    return l.c < r.c;
  });
  return out;
}

}  // namespace sqapprox
