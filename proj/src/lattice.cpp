#include "sqapprox/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sqapprox {

namespace {

// lo <= num/den <= hi by cross multiplication; den = 0 fails.
bool ratio_in_bounds(Int num, Int den, const SieveConfig& cfg) {
  if (den == 0) return false;
  Wide n = num;
  Wide d = den;
  bool above_lo = exact::mul(cfg.lo.num, d) <= exact::mul(cfg.lo.den, n);
  bool below_hi = exact::mul(n, cfg.hi.den) <= exact::mul(cfg.hi.num, d);
  return above_lo && below_hi;
}

void check_enumeration_width(Int h_max, std::size_t n) {
  Int sq = exact::mul64(h_max, h_max);
  (void)exact::mul64(sq, static_cast<Int>(n));
}

}  // namespace

CoeffVector::CoeffVector(std::vector<Int> coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) throw DomainError("coefficient vectors need dimension n >= 2");
  for (Int c : coords_) {
    if (c < 0) throw DomainError("coefficient vectors live in Z>=0^n");
    height_ = std::max(height_, c);
  }
}

std::vector<Wide> CoeffVector::squared() const {
  std::vector<Wide> out;
  out.reserve(coords_.size());
  for (Int c : coords_) out.push_back(exact::mul(c, c));
  return out;
}

double CoeffVector::squared_norm() const {
  long double s = 0;
  for (Int c : coords_) {
    long double q = static_cast<long double>(c) * static_cast<long double>(c);
    s += q * q;
  }
  return static_cast<double>(std::sqrt(s));
}

Int height(const CoeffVector& v) { return v.height(); }

void SieveConfig::validate() const {
  if (lo.num <= 0 || lo.den <= 0 || hi.num <= 0 || hi.den <= 0) {
    throw DomainError("sieve ratio bounds must be positive");
  }
  // lo <= 1 <= hi
  if (lo.num > lo.den || hi.num < hi.den) throw DomainError("sieve ratio bounds must satisfy lo <= 1 <= hi");
}

bool passes_sieve(const CoeffVector& v, const SieveConfig& cfg) {
  if (v.is_zero()) throw ZeroVectorError();
  if (cfg.require_coprime) {
    Int g = 0;
    for (Int c : v.coords()) g = std::gcd(g, c);
    if (g != 1) return false;
  }
  return ratio_in_bounds(v[0], v[1], cfg);
}

SievedStream::SievedStream(Int h_min, Int h_max, SieveConfig cfg, std::size_t n)
    : h_min_(h_min), h_max_(h_max), cfg_(cfg), odometer_(n, 0) {
  if (n < 2) throw DomainError("dimension n must be >= 2");
  if (h_min < 1 || h_min > h_max) throw DomainError("enumeration needs 1 <= h_min <= h_max");
  cfg_.validate();
  check_enumeration_width(h_max, n);
}

bool SievedStream::advance() {
  for (std::size_t i = odometer_.size(); i-- > 0;) {
    if (odometer_[i] < h_max_) {
      ++odometer_[i];
      return true;
    }
    odometer_[i] = 0;
  }
  return false;
}

std::optional<CoeffVector> SievedStream::next() {
  while (!done_) {
    if (!started_) {
      started_ = true;
    } else if (!advance()) {
      done_ = true;
      break;
    }
    Int h = *std::max_element(odometer_.begin(), odometer_.end());
    if (h < h_min_ || h > h_max_) continue;
    CoeffVector v(odometer_);
    if (passes_sieve(v, cfg_)) return v;
  }
  return std::nullopt;
}

std::vector<CoeffVector> enumerate_sieved(Int h_min, Int h_max, const SieveConfig& cfg, std::size_t n) {
  SievedStream stream(h_min, h_max, cfg, n);
  std::vector<CoeffVector> out;
  while (auto v = stream.next()) out.push_back(std::move(*v));
  return out;
}

Int count_sieved_dyadic(int k, std::size_t n) {
  if (k < 0) throw DomainError("dyadic index k must be >= 0");
  if (k > 61) throw OverflowError("2^(k+1) exceeds 64-bit range");
  const Int lo = Int{1} << k;
  const Int hi = (Int{1} << (k + 1)) - 1;
  check_enumeration_width(hi, n);
  if (n != 2) {
    SievedStream stream(lo, hi, SieveConfig{}, n);
    Int count = 0;
    while (stream.next()) ++count;
    return count;
  }
  // n = 2: visit the vectors whose largest coordinate is m exactly once each.
  const SieveConfig cfg;
  Int count = 0;
  for (Int m = lo; m <= hi; ++m) {
    for (Int o = 0; o <= m; ++o) {
      if (std::gcd(m, o) != 1) continue;
      if (ratio_in_bounds(m, o, cfg)) ++count;
      if (o != m && ratio_in_bounds(o, m, cfg)) ++count;
    }
  }
  return count;
}

std::vector<Int> totient_table(Int q_max) {
  if (q_max < 0) throw DomainError("totient table bound must be >= 0");
  std::vector<Int> phi(static_cast<std::size_t>(q_max) + 1);
  std::iota(phi.begin(), phi.end(), Int{0});
  for (Int p = 2; p <= q_max; ++p) {
    if (phi[p] != p) continue;  // composite: already reduced by a smaller prime
    for (Int m = p; m <= q_max; m += p) phi[m] -= phi[m] / p;
  }
  return phi;
}

Int totient_summatory(Int q_max) {
  if (q_max < 1) throw DomainError("totient_summatory needs Q >= 1");
  auto phi = totient_table(q_max);
  Int sum = 0;
  for (Int q = 1; q <= q_max; ++q) sum = exact::add64(sum, phi[q]);
  return sum;
}

Int totient_halving_count(int k) {
  if (k < 0 || k > 40) throw DomainError("totient_halving_count supports 0 <= k <= 40");
  const Int lo = Int{1} << k;
  const Int hi = Int{1} << (k + 1);
  auto phi = totient_table(hi);
  Int sum = 0;
  for (Int a = lo; a < hi; ++a) sum = exact::add64(sum, phi[a] - phi[a / 2]);
  return exact::mul64(2, sum);
}

Int totient_block_sum(int k) {
  if (k < 0 || k > 40) throw DomainError("totient_block_sum supports 0 <= k <= 40");
  const Int lo = Int{1} << k;
  const Int hi = Int{1} << (k + 1);
  auto phi = totient_table(hi);
  Int sum = 0;
  for (Int a = lo; a < hi; ++a) sum = exact::add64(sum, phi[a]);
  return sum;
}

Wide det2(Wide a, Wide b, Wide c, Wide d) { return exact::sub(exact::mul(a, d), exact::mul(b, c)); }

double sin_angle_of_squares(std::span<const Int> v, std::span<const Int> w, Wide* dominant_minor,
                            std::size_t* minor_i, std::size_t* minor_j) {
  if (v.size() != w.size()) throw DomainError("angle between vectors of different dimension");
  const std::size_t n = v.size();
  long double nv = 0;
  long double nw = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double sv = static_cast<long double>(v[i]) * v[i];
    long double sw = static_cast<long double>(w[i]) * w[i];
    nv += sv * sv;
    nw += sw * sw;
  }
  if (nv == 0 || nw == 0) throw ZeroVectorError();

  long double wedge_sq = 0;
  Wide best = 0;
  std::size_t bi = 0;
  std::size_t bj = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Wide vi = exact::mul(v[i], v[i]);
    const Wide wi = exact::mul(w[i], w[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const Wide vj = exact::mul(v[j], v[j]);
      const Wide wj = exact::mul(w[j], w[j]);
      const Wide d = det2(vi, vj, wi, wj);
      const auto dl = static_cast<long double>(d);
      wedge_sq += dl * dl;
      if (exact::abs(d) > exact::abs(best)) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  if (dominant_minor != nullptr) *dominant_minor = best;
  if (minor_i != nullptr) *minor_i = bi;
  if (minor_j != nullptr) *minor_j = bj;
  long double s = std::sqrt(wedge_sq) / (std::sqrt(nv) * std::sqrt(nw));
  return static_cast<double>(std::clamp(s, 0.0L, 1.0L));
}

AnglePair angle_between(const CoeffVector& v, const CoeffVector& w) {
  AnglePair out{v, w};
  out.sin_alpha = sin_angle_of_squares(v.coords(), w.coords(), &out.det_squares, &out.minor_i, &out.minor_j);
  return out;
}

const char* to_string(AngleClass c) {
  switch (c) {
    case AngleClass::Big:
      return "Big";
    case AngleClass::ModeratelySmall:
      return "ModeratelySmall";
    case AngleClass::UltraSmall:
      return "UltraSmall";
  }
  return "?";
}

AngleClass classify_angle(double sin_alpha, double r, Int h, Int h_prime) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("ball radius must lie in (0, 1)");
  if (h < h_prime) std::swap(h, h_prime);
  if (h_prime < 1) throw DomainError("classify_angle needs both heights >= 1");
  const auto hd = static_cast<double>(h);
  const auto hp = static_cast<double>(h_prime);
  if (sin_alpha >= 1.0 / (r * hd)) return AngleClass::Big;
  if (sin_alpha < 1.0 / (r * r * hd * hp)) return AngleClass::UltraSmall;
  return AngleClass::ModeratelySmall;
}

AngleClass classify_angle(const AnglePair& pair, double r) {
  return classify_angle(pair.sin_alpha, r, pair.first.height(), pair.second.height());
}

}  // namespace sqapprox
