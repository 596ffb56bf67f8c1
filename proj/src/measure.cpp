#include "sqapprox/measure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "parallel.hpp"
#include "sqapprox/errors.hpp"

namespace sqapprox {

namespace {

using Interval = std::pair<double, double>;

bool is_power_of_two(Int v) { return v > 0 && std::has_single_bit(static_cast<std::uint64_t>(v)); }

double integer_power(double base, std::size_t e) {
  double r = 1.0;
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Grid geometry

struct Grid {
  std::size_t n = 0;
  int R = 0;
  std::vector<double> lo;
  std::vector<double> width;  // cell width per axis
};

Grid make_grid(const Region& region, const GridSpec& spec) {
  validate_region(region);
  const std::size_t n = region_dim(region);
  spec.validate(n);
  auto [lo, hi] = region_bounds(region);
  Grid g{n, spec.resolution, lo, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) g.width[i] = (hi[i] - lo[i]) / spec.resolution;
  return g;
}

void check_families(std::span<const StripFamily> sets, std::size_t n) {
  for (const auto& s : sets) {
    if (s.a.dim() != n) throw DomainError("strip dimension does not match region");
    if (s.a.is_zero()) throw ZeroVectorError();
    if (!(s.half_width >= 0.0)) throw DomainError("strip half-width must be >= 0");
  }
}

/// Integrals over the region of the cover count m(x) = #{families containing x}.
struct CoverStats {
  double uni = 0.0;  // |{m > 0}|
  double m1 = 0.0;   // ∫ m
  double m2 = 0.0;   // ∫ m^2
  double all = 0.0;  // |{m = number of families}|
};

CoverStats tree_reduce(const std::vector<CoverStats>& blocks) {
  std::vector<double> u;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
  for (const auto& s : blocks) {
    u.push_back(s.uni);
    a.push_back(s.m1);
    b.push_back(s.m2);
    c.push_back(s.all);
  }
  return {detail::tree_sum(u), detail::tree_sum(a), detail::tree_sum(b), detail::tree_sum(c)};
}

double family_thickness(const StripFamily& s) { return 2.0 * s.half_width / s.a.squared_norm(); }

/// Sub-intervals of (xl, xh) on which the family covers the row whose other
/// coordinates contribute `rest` to the linear form. Sorted and merged.
/// Appends to `out`; with `merge` set, `out` must hold only this family's intervals.
void family_row_intervals(const StripFamily& s, long double rest, double xl, double xh, std::span<const double> row_point,
                          std::vector<Interval>& out, bool merge = true) {
  const long double hw = s.half_width;
  if (!(hw > 0)) return;
  const long double a0 = static_cast<long double>(s.a[0]) * s.a[0];
  if (a0 == 0) {
    // The linear form is constant along the row.
    std::vector<double> x(row_point.begin(), row_point.end());
    x[0] = 0.0;
    bool hit = false;
    if (s.only_c) {
      hit = linear_form_within(s.a.coords(), *s.only_c, x, s.half_width);
    } else {
      auto [c_lo, c_hi] = square_window(static_cast<double>(rest), s.half_width);
      for (Int c = c_lo; c <= c_hi && !hit; ++c) hit = linear_form_within(s.a.coords(), c, x, s.half_width);
    }
    if (hit) out.emplace_back(xl, xh);
    return;
  }
  const long double t_lo = a0 * xl + rest;
  const long double t_hi = a0 * xh + rest;
  Int c_min = 0;
  Int c_max = 0;
  if (s.only_c) {
    c_min = c_max = *s.only_c;
  } else {
    c_min = std::max<Int>(0, static_cast<Int>(std::floor(std::sqrt(std::max(0.0L, t_lo - hw)))) - 1);
    c_max = static_cast<Int>(std::ceil(std::sqrt(t_hi + hw))) + 1;
  }
  for (Int c = c_min; c <= c_max; ++c) {
    const long double c2 = static_cast<long double>(c) * c;
    const double l = static_cast<double>(std::max<long double>(xl, (c2 - hw - rest) / a0));
    const double r = static_cast<double>(std::min<long double>(xh, (c2 + hw - rest) / a0));
    if (r > l) {
      if (merge && !out.empty() && l <= out.back().second) {
        out.back().second = std::max(out.back().second, r);
      } else {
        out.emplace_back(l, r);
      }
    }
  }
}

/// Sweep over the per-family interval lists of one row.
CoverStats sweep_row(const std::vector<std::vector<Interval>>& per_family, std::vector<std::pair<double, int>>& events) {
  events.clear();
  for (const auto& list : per_family) {
    for (const auto& [l, r] : list) {
      events.emplace_back(l, 1);
      events.emplace_back(r, -1);
    }
  }
  std::sort(events.begin(), events.end());
  CoverStats s;
  const auto F = static_cast<long>(per_family.size());
  long m = 0;
  double prev = 0.0;
  for (const auto& [pos, delta] : events) {
    const double len = pos - prev;
    if (m > 0 && len > 0) {
      s.uni += len;
      s.m1 += static_cast<double>(m) * len;
      s.m2 += static_cast<double>(m * m) * len;
      if (m == F) s.all += len;
    }
    m += delta;
    prev = pos;
  }
  return s;
}

/// Row positions: the cell centers of axes 1..n-1 of the grid.
template <class RowFn>
std::vector<CoverStats> for_each_row_block(const Grid& g, unsigned threads, RowFn&& row_fn) {
  const std::size_t n = g.n;
  const auto R = static_cast<std::size_t>(g.R);
  // One block per index of the last axis; rows inside a block run over axes 1..n-2.
  std::size_t rows_per_block = 1;
  for (std::size_t i = 1; i + 1 < n; ++i) rows_per_block *= R;
  std::vector<CoverStats> blocks(R);
  detail::for_each_block(R, threads, [&](std::size_t b) {
    std::vector<double> x(n, 0.0);
    x[n - 1] = g.lo[n - 1] + (static_cast<double>(b) + 0.5) * g.width[n - 1];
    CoverStats acc;
    for (std::size_t r = 0; r < rows_per_block; ++r) {
      std::size_t rem = r;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        x[i] = g.lo[i] + (static_cast<double>(rem % R) + 0.5) * g.width[i];
        rem /= R;
      }
      CoverStats s = row_fn(x);
      acc.uni += s.uni;
      acc.m1 += s.m1;
      acc.m2 += s.m2;
      acc.all += s.all;
    }
    blocks[b] = acc;
  });
  return blocks;
}

/// Row extent of the region along axis 0 for the row through x (x[0] ignored).
bool row_extent(const Region& region, std::span<const double> x, double& xl, double& xh) {
  if (const auto* b = std::get_if<Ball>(&region)) {
    double d2 = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) d2 += (x[i] - b->center[i]) * (x[i] - b->center[i]);
    const double h2 = b->radius * b->radius - d2;
    if (!(h2 > 0.0)) return false;
    const double h = std::sqrt(h2);
    xl = b->center[0] - h;
    xh = b->center[0] + h;
    return true;
  }
  auto [lo, hi] = region_bounds(region);
  xl = lo[0];
  xh = hi[0];
  return true;
}

/// Length of the union of intervals (sorted in place).
double union_length(std::vector<Interval>& v) {
  std::sort(v.begin(), v.end());
  double total = 0.0;
  double cur_l = 0.0;
  double cur_r = 0.0;
  bool open = false;
  for (const auto& [l, r] : v) {
    if (open && l <= cur_r) {
      cur_r = std::max(cur_r, r);
      continue;
    }
    if (open) total += cur_r - cur_l;
    cur_l = l;
    cur_r = r;
    open = true;
  }
  if (open) total += cur_r - cur_l;
  return total;
}

CoverStats rows_engine(std::span<const StripFamily> sets, const Region& region, const Grid& g, unsigned threads,
                       bool union_only) {
  double row_weight = 1.0;
  for (std::size_t i = 1; i < g.n; ++i) row_weight *= g.width[i];
  auto blocks = for_each_row_block(g, threads, [&](std::span<const double> x) {
    double xl = 0.0;
    double xh = 0.0;
    if (!row_extent(region, x, xl, xh)) return CoverStats{};
    if (union_only) {
      // Only |{m > 0}| is wanted: pool every interval and merge once.
      std::vector<Interval> all;
      for (const auto& s : sets) {
        long double rest = 0;
        for (std::size_t i = 1; i < g.n; ++i) rest += static_cast<long double>(s.a[i]) * s.a[i] * x[i];
        family_row_intervals(s, rest, xl, xh, x, all, false);
      }
      CoverStats st;
      st.uni = union_length(all) * row_weight;
      return st;
    }
    std::vector<std::vector<Interval>> per_family(sets.size());
    std::vector<std::pair<double, int>> events;
    for (std::size_t k = 0; k < sets.size(); ++k) {
      const auto& s = sets[k];
      long double rest = 0;
      for (std::size_t i = 1; i < g.n; ++i) rest += static_cast<long double>(s.a[i]) * s.a[i] * x[i];
      per_family[k].clear();
      family_row_intervals(s, rest, xl, xh, x, per_family[k]);
    }
    CoverStats st = sweep_row(per_family, events);
    st.uni *= row_weight;
    st.m1 *= row_weight;
    st.m2 *= row_weight;
    st.all *= row_weight;
    return st;
  });
  return tree_reduce(blocks);
}

CoverStats sampling_engine(std::span<const StripFamily> sets, const Region& region, const Grid& g, int k,
                           unsigned threads) {
  const std::size_t n = g.n;
  const auto R = static_cast<std::size_t>(g.R);
  const auto K = static_cast<std::size_t>(k);
  std::size_t per_block = 1;  // samples per block: everything except the last axis cell index
  for (std::size_t i = 0; i + 1 < n; ++i) per_block *= R * K;
  const std::size_t last_sub = K;
  double sample_volume = 1.0;
  for (std::size_t i = 0; i < n; ++i) sample_volume *= g.width[i] / static_cast<double>(K);
  const auto F = static_cast<Int>(sets.size());

  std::vector<CoverStats> blocks(R);
  detail::for_each_block(R, threads, [&](std::size_t b) {
    std::vector<double> x(n);
    std::uint64_t cu = 0;
    std::uint64_t c1 = 0;
    std::uint64_t c2 = 0;
    std::uint64_t ca = 0;
    for (std::size_t s_last = 0; s_last < last_sub; ++s_last) {
      x[n - 1] = g.lo[n - 1] + (static_cast<double>(b) + (static_cast<double>(s_last) + 0.5) / K) * g.width[n - 1];
      for (std::size_t idx = 0; idx < per_block; ++idx) {
        std::size_t rem = idx;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          const std::size_t sub = rem % (R * K);
          rem /= R * K;
          x[i] = g.lo[i] + (static_cast<double>(sub) + 0.5) / K * g.width[i];
        }
        if (!region_contains(region, x)) continue;
        Int m = 0;
        for (const auto& s : sets) m += s.contains(x) ? 1 : 0;
        if (m > 0) {
          ++cu;
          c1 += static_cast<std::uint64_t>(m);
          c2 += static_cast<std::uint64_t>(m * m);
          if (m == F) ++ca;
        }
      }
    }
    blocks[b] = {static_cast<double>(cu) * sample_volume, static_cast<double>(c1) * sample_volume,
                 static_cast<double>(c2) * sample_volume, static_cast<double>(ca) * sample_volume};
  });
  return tree_reduce(blocks);
}

struct EngineResult {
  CoverStats stats;
  bool coarse_warning = false;
  double min_thickness = 0.0;
  double sample_spacing = 0.0;
};

EngineResult run_engine(std::span<const StripFamily> sets, const Region& region, const GridSpec& spec,
                        bool union_only = false) {
  Grid g = make_grid(region, spec);
  check_families(sets, g.n);
  EngineResult out;
  out.min_thickness = std::numeric_limits<double>::infinity();
  for (const auto& s : sets) out.min_thickness = std::min(out.min_thickness, family_thickness(s));
  if (sets.empty()) out.min_thickness = 0.0;

  const double cell = *std::min_element(g.width.begin(), g.width.end());
  if (spec.rule.kind == SampleKind::RowExact) {
    double across = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < g.n; ++i) across = std::min(across, g.width[i]);
    out.sample_spacing = across;
    // Lengths along axis 0 are exact; only families constant along rows are sampled.
    for (const auto& s : sets) {
      if (s.a[0] == 0 && family_thickness(s) < 2.0 * across) out.coarse_warning = true;
    }
    if (!sets.empty()) out.stats = rows_engine(sets, region, g, spec.threads, union_only);
    return out;
  }
  const int k = spec.rule.kind == SampleKind::Subsample ? spec.rule.per_axis : 1;
  out.sample_spacing = cell / k;
  for (const auto& s : sets) {
    if (family_thickness(s) < 2.0 * out.sample_spacing) out.coarse_warning = true;
  }
  if (!sets.empty()) out.stats = sampling_engine(sets, region, g, k, spec.threads);
  return out;
}

MeasureEstimate to_estimate(const EngineResult& r, double value) {
  return {value, r.coarse_warning, r.min_thickness, r.sample_spacing};
}

void require_sieved_ball_vector(const CoeffVector& a, const Ball& ball) {
  if (a.dim() != ball.center.size()) throw DomainError("vector dimension does not match ball");
  if (!passes_sieve(a)) throw DomainError("vector does not pass the sieve");
}

}  // namespace

// ---------------------------------------------------------------------------

std::string SampleRule::describe() const {
  switch (kind) {
    case SampleKind::CellCenter:
      return "center";
    case SampleKind::Subsample:
      return "sub:" + std::to_string(per_axis);
    case SampleKind::RowExact:
      return "rows";
  }
  return "?";
}

SampleRule SampleRule::parse(const std::string& text) {
  if (text == "center") return center();
  if (text == "rows") return rows();
  if (text.rfind("sub:", 0) == 0) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(text.substr(4), &used);
      if (used == text.size() - 4 && k >= 1 && k <= 64) return subsample(k);
    } catch (const std::exception&) {
    }
  }
  throw DomainError("sample rule must be center, sub:<k> or rows, got '" + text + "'");
}

void GridSpec::validate(std::size_t n) const {
  if (resolution < 16 || !is_power_of_two(resolution)) {
    throw DomainError("grid resolution must be a power of two >= 16");
  }
  if (rule.kind == SampleKind::Subsample && (rule.per_axis < 1 || rule.per_axis > 64)) {
    throw DomainError("subsample count per axis must lie in [1, 64]");
  }
  const double per_axis =
      static_cast<double>(resolution) * (rule.kind == SampleKind::Subsample ? rule.per_axis : 1);
  const std::size_t axes = rule.kind == SampleKind::RowExact ? n - 1 : n;
  if (integer_power(per_axis, axes) > static_cast<double>(max_cells)) {
    throw DomainError("grid exceeds the configured cell cap");
  }
}

StripFamily StripFamily::all_c(CoeffVector a, const ApproxFunction& f) {
  if (a.is_zero()) throw ZeroVectorError();
  const double hw = f(a.height());
  return {std::move(a), hw, std::nullopt};
}

StripFamily StripFamily::single(const Strip& s) { return {s.a, s.half_width, s.c}; }

bool StripFamily::contains(std::span<const double> x) const {
  if (x.size() != a.dim()) throw DomainError("point dimension does not match strip");
  if (only_c) return linear_form_within(a.coords(), *only_c, x, half_width);
  long double t = 0;
  for (std::size_t i = 0; i < x.size(); ++i) t += static_cast<long double>(a[i]) * a[i] * x[i];
  auto [c_lo, c_hi] = square_window(static_cast<double>(t), half_width);
  for (Int c = c_lo; c <= c_hi; ++c) {
    if (linear_form_within(a.coords(), c, x, half_width)) return true;
  }
  return false;
}

double StripFamily::thickness() const { return family_thickness(*this); }

MeasureEstimate estimate_measure(std::span<const Strip> sets, const Region& region, const GridSpec& grid) {
  std::vector<StripFamily> fams;
  fams.reserve(sets.size());
  for (const auto& s : sets) fams.push_back(StripFamily::single(s));
  return estimate_union_measure(fams, region, grid);
}

MeasureEstimate estimate_union_measure(std::span<const StripFamily> sets, const Region& region,
                                       const GridSpec& grid) {
  auto r = run_engine(sets, region, grid, true);
  return to_estimate(r, r.stats.uni);
}

MeasureEstimate estimate_intersection_measure(const StripFamily& first, const StripFamily& second,
                                              const Region& region, const GridSpec& grid) {
  const std::vector<StripFamily> pair{first, second};
  auto r = run_engine(pair, region, grid);
  return to_estimate(r, r.stats.all);
}

double sandwich_c1() { return 1.0 / (4.0 * std::numbers::pi); }

double sandwich_c2(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  return 40.0 / (eps * std::numbers::pi);
}

SandwichEstimate union_measure_over_c(const CoeffVector& a, const ApproxFunction& f, const Ball& ball,
                                      const GridSpec& grid) {
  validate_region(ball);
  if (a.dim() != ball.center.size()) throw DomainError("vector dimension does not match ball");
  const std::vector<StripFamily> fam{StripFamily::all_c(a, f)};
  SandwichEstimate out;
  out.estimate = estimate_union_measure(fam, ball, grid);
  const double scale = ball.volume() * f(a.height()) / static_cast<double>(a.height());
  out.lower = sandwich_c1() * scale;
  out.upper = sandwich_c2(ball.eps) * scale;
  return out;
}

MeasureEstimate pairwise_intersection_measure(const CoeffVector& a, const CoeffVector& a_prime,
                                              const ApproxFunction& f, const Ball& ball, const GridSpec& grid) {
  validate_region(ball);
  if (a == a_prime) throw DomainError("pairwise intersection needs distinct vectors");
  require_sieved_ball_vector(a, ball);
  require_sieved_ball_vector(a_prime, ball);
  return estimate_intersection_measure(StripFamily::all_c(a, f), StripFamily::all_c(a_prime, f), ball, grid);
}

double PairwiseTable::at(std::size_t i, std::size_t j) const {
  const std::size_t N = size();
  if (i >= N || j >= N) throw DomainError("pairwise table index out of range");
  if (i == j) return diagonal[i];
  if (i > j) std::swap(i, j);
  return upper[i * N - i * (i + 1) / 2 + (j - i - 1)];
}

PairwiseTable pairwise_intersections(std::span<const CoeffVector> vectors, const ApproxFunction& f, const Ball& ball,
                                     const GridSpec& grid) {
  const Region region = ball;
  Grid g = make_grid(region, grid);
  const std::size_t N = vectors.size();
  if (N > 4096) throw DomainError("pairwise table supports at most 4096 vectors");
  std::vector<StripFamily> fams;
  fams.reserve(N);
  for (const auto& v : vectors) fams.push_back(StripFamily::all_c(v, f));
  check_families(fams, g.n);

  PairwiseTable out;
  out.diagonal.assign(N, 0.0);
  out.upper.assign(N * (N - 1) / 2, 0.0);
  auto pair_index = [N](std::size_t i, std::size_t j) { return i * N - i * (i + 1) / 2 + (j - i - 1); };

  // Adds weight to every pair in the (sorted) active set.
  auto credit = [&](const std::vector<std::size_t>& active, double w) {
    for (std::size_t p = 0; p < active.size(); ++p) {
      out.diagonal[active[p]] += w;
      for (std::size_t q = p + 1; q < active.size(); ++q) out.upper[pair_index(active[p], active[q])] += w;
    }
  };

  for (const auto& s : fams) {
    const double spacing = grid.rule.kind == SampleKind::Subsample
                               ? *std::min_element(g.width.begin(), g.width.end()) / grid.rule.per_axis
                               : *std::min_element(g.width.begin(), g.width.end());
    if (grid.rule.kind == SampleKind::RowExact ? (s.a[0] == 0 && s.thickness() < 2.0 * spacing)
                                               : s.thickness() < 2.0 * spacing) {
      out.coarse_warning = true;
    }
  }

  const std::size_t n = g.n;
  const auto R = static_cast<std::size_t>(g.R);
  if (grid.rule.kind == SampleKind::RowExact) {
    double row_weight = 1.0;
    for (std::size_t i = 1; i < n; ++i) row_weight *= g.width[i];
    std::size_t rows = 1;
    for (std::size_t i = 1; i < n; ++i) rows *= R;
    std::vector<double> x(n, 0.0);
    std::vector<std::vector<Interval>> per(N);
    std::vector<std::tuple<double, int, std::size_t>> events;
    std::vector<std::size_t> active;
    for (std::size_t r = 0; r < rows; ++r) {
      std::size_t rem = r;
      for (std::size_t i = 1; i < n; ++i) {
        x[i] = g.lo[i] + (static_cast<double>(rem % R) + 0.5) * g.width[i];
        rem /= R;
      }
      double xl = 0.0;
      double xh = 0.0;
      if (!row_extent(region, x, xl, xh)) continue;
      events.clear();
      for (std::size_t k = 0; k < N; ++k) {
        long double rest = 0;
        for (std::size_t i = 1; i < n; ++i) rest += static_cast<long double>(fams[k].a[i]) * fams[k].a[i] * x[i];
        per[k].clear();
        family_row_intervals(fams[k], rest, xl, xh, x, per[k]);
        for (const auto& [l, h] : per[k]) {
          events.emplace_back(l, 1, k);
          events.emplace_back(h, -1, k);
        }
      }
      // Closings sort before openings at equal positions; zero-length overlaps carry no weight.
      std::sort(events.begin(), events.end());
      active.clear();
      double prev = 0.0;
      for (const auto& [pos, delta, k] : events) {
        if (!active.empty() && pos > prev) credit(active, (pos - prev) * row_weight);
        if (delta > 0) {
          active.insert(std::lower_bound(active.begin(), active.end(), k), k);
        } else {
          active.erase(std::lower_bound(active.begin(), active.end(), k));
        }
        prev = pos;
      }
    }
    return out;
  }

  const int K = grid.rule.kind == SampleKind::Subsample ? grid.rule.per_axis : 1;
  double sample_volume = 1.0;
  for (std::size_t i = 0; i < n; ++i) sample_volume *= g.width[i] / K;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= R * static_cast<std::size_t>(K);
  std::vector<double> x(n);
  std::vector<std::size_t> active;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = g.lo[i] + (static_cast<double>(rem % (R * K)) + 0.5) / K * g.width[i];
      rem /= R * K;
    }
    if (!region_contains(region, x)) continue;
    active.clear();
    for (std::size_t k = 0; k < N; ++k) {
      if (fams[k].contains(x)) active.push_back(k);
    }
    credit(active, sample_volume);
  }
  return out;
}

BCStatistics bc_statistics(Int H, const ApproxFunction& f, const Ball& ball, const GridSpec& grid,
                           const SieveConfig& sieve) {
  if (H < 2) throw DomainError("bc_statistics needs H >= 2");
  validate_region(ball);
  const auto vectors = enumerate_sieved(1, H, sieve, ball.center.size());
  std::vector<StripFamily> fams;
  fams.reserve(vectors.size());
  for (const auto& v : vectors) fams.push_back(StripFamily::all_c(v, f));
  auto r = run_engine(fams, ball, grid);
  BCStatistics out;
  out.S1 = r.stats.m1;
  out.S2 = r.stats.m2;
  out.vector_count = vectors.size();
  out.coarse_warning = r.coarse_warning;
  if (out.S2 > 0.0) out.ratio = out.S1 * out.S1 / out.S2;
  return out;
}

namespace {

/// Every nonzero a in Z>=0^n with h_lo <= h_a <= h_hi, lexicographically.
template <class Fn>
void for_each_window_vector(std::size_t n, Int h_lo, Int h_hi, Fn&& fn) {
  std::vector<Int> a(n, 0);
  while (true) {
    std::size_t i = n;
    while (i > 0 && a[i - 1] == h_hi) a[--i] = 0;
    if (i == 0) return;
    ++a[i - 1];
    const Int h = *std::max_element(a.begin(), a.end());
    if (h >= h_lo) fn(a, h);
  }
}

void check_window(std::size_t n, Int h_lo, Int h_hi, const ApproxFunction& f) {
  if (n < 2) throw DomainError("dimension n must be >= 2");
  if (h_lo < 1 || h_lo > h_hi) throw DomainError("height window needs 1 <= h_lo <= h_hi");
  if (auto mh = f.max_height(); mh && *mh < h_hi) throw DomainError("height window lies past the psi table");
  (void)exact::mul64(exact::mul64(h_hi, h_hi), static_cast<Int>(n));
}

}  // namespace

MeasureEstimate window_union_measure(const ApproxFunction& f, std::size_t n, Int h_lo, Int h_hi,
                                     const Region& region, const GridSpec& grid) {
  check_window(n, h_lo, h_hi, f);
  if (region_dim(region) != n) throw DomainError("region dimension does not match n");
  std::vector<StripFamily> fams;
  for_each_window_vector(n, h_lo, h_hi, [&](const std::vector<Int>& a, Int h) {
    fams.push_back({CoeffVector(a), f(h), std::nullopt});
  });
  return estimate_union_measure(fams, region, grid);
}

// ---------------------------------------------------------------------------
// Series criteria

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Converging:
      return "Converging";
    case Verdict::Diverging:
      return "Diverging";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

Verdict block_verdict(std::span<const double> blocks) {
  if (blocks.size() < 3) return Verdict::Inconclusive;
  const std::size_t ratios = std::min<std::size_t>(4, blocks.size() - 1);
  bool all_small = true;
  bool all_large = true;
  for (std::size_t k = blocks.size() - ratios; k < blocks.size(); ++k) {
    const double prev = blocks[k - 1];
    const double cur = blocks[k];
    double ratio = 0.0;
    if (prev > 0.0) {
      ratio = cur / prev;
    } else {
      ratio = cur > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    if (!(ratio < 0.9)) all_small = false;
    if (!(ratio >= 0.99)) all_large = false;
  }
  if (all_small) return Verdict::Converging;
  if (all_large) return Verdict::Diverging;
  return Verdict::Inconclusive;
}

namespace {

struct SeriesSums {
  std::vector<std::pair<Int, double>> partial;
  std::vector<double> blocks;
};

template <class Term>
SeriesSums sum_series(Int H, Term&& term) {
  SeriesSums out;
  CompensatedSum total;
  CompensatedSum block;
  Int next_record = 1;
  for (Int h = 1; h <= H; ++h) {
    const double t = term(h);
    total.add(t);
    block.add(t);
    if (h == next_record) {
      out.partial.emplace_back(h, total.value());
      next_record = h <= std::numeric_limits<Int>::max() / 2 ? 2 * h : H + 1;
    } else if (h == H) {
      out.partial.emplace_back(h, total.value());
    }
    if (is_power_of_two(h + 1)) {  // h closes the block [2^j, 2^{j+1})
      out.blocks.push_back(block.value());
      block = CompensatedSum{};
    }
  }
  return out;
}

void check_series_range(const ApproxFunction& f, std::size_t n, Int H) {
  if (n < 2) throw DomainError("dimension n must be >= 2");
  if (H < 1) throw DomainError("series need H >= 1");
  if (auto mh = f.max_height(); mh && *mh < H) throw DomainError("H lies past the psi table");
}

}  // namespace

DichotomyReport khintchine_sum(const ApproxFunction& f, std::size_t n, Int H) {
  check_series_range(f, n, H);
  const auto e = static_cast<double>(n - 2);
  auto sums = sum_series(H, [&](Int h) { return std::pow(static_cast<double>(h), e) * f(h); });
  DichotomyReport out;
  for (const auto& [h, s] : sums.partial) out.partial_sums.push_back({h, s});
  out.block_sums = std::move(sums.blocks);
  out.verdict_hint = block_verdict(out.block_sums);
  return out;
}

DichotomyReport hausdorff_sum(const ApproxFunction& f, std::size_t n, double s, Int H) {
  check_series_range(f, n, H);
  const auto nd = static_cast<double>(n);
  if (!(s > nd - 1.0 && s < nd)) throw DomainError("Hausdorff exponent s must lie in (n-1, n)");
  const double p = s - (nd - 1.0);
  const double q = 3.0 * nd - 2.0 - 2.0 * s;
  auto sums = sum_series(H, [&](Int h) { return std::pow(f(h), p) * std::pow(static_cast<double>(h), q); });
  DichotomyReport out;
  for (const auto& [h, v] : sums.partial) out.hausdorff_sums.push_back({h, s, v});
  out.block_sums = std::move(sums.blocks);
  out.verdict_hint = block_verdict(out.block_sums);
  return out;
}

Rational hausdorff_term_exponent(const Rational& v, std::size_t n, const Rational& s) {
  const Rational nn(static_cast<Wide>(n));
  return -(v * (s - (nn - Rational(1)))) + Rational(3) * nn - Rational(2) - Rational(2) * s;
}

Rational critical_exponent_s(const Rational& v, std::size_t n) {
  const Rational nn(static_cast<Wide>(n));
  if (v + Rational(2) <= Rational(0)) throw DomainError("critical exponent needs v > -2");
  return (nn - Rational(1)) + (nn + Rational(1)) / (Rational(2) + v);
}

bool power_series_converges(const Rational& exponent) { return exponent < Rational(-1); }

double predicted_dimension(double lambda, std::size_t n) {
  if (n < 2) throw DomainError("dimension n must be >= 2");
  const auto nd = static_cast<double>(n);
  if (std::isnan(lambda) || lambda < nd - 1.0) throw DomainError("dimension formula needs lambda >= n-1");
  if (std::isinf(lambda)) return nd - 1.0;
  return (nd - 1.0) + (nd + 1.0) / (2.0 + lambda);
}

// ---------------------------------------------------------------------------
// Box counting

namespace {

std::vector<int> check_resolutions(std::span<const int> resolutions, std::size_t n) {
  if (resolutions.size() < 3) throw DomainError("box counting needs at least 3 resolutions");
  std::vector<int> res(resolutions.begin(), resolutions.end());
  std::sort(res.begin(), res.end());
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (res[i] < 2 || !is_power_of_two(res[i])) throw DomainError("box resolutions must be powers of two >= 2");
    if (i > 0 && res[i] == res[i - 1]) throw DomainError("box resolutions must be distinct");
  }
  if (integer_power(res.back(), n) > static_cast<double>(std::uint64_t{1} << 30)) {
    throw DomainError("finest box grid exceeds 2^30 boxes");
  }
  return res;
}

/// Occupancy bitmap at the finest resolution: a closed box is occupied when it
/// meets the open slab |a^2.x - c^2| < hw.
class Rasterizer {
 public:
  Rasterizer(std::size_t n, int R) : n_(n), R_(R), rho_(1.0 / R) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(R);
    cells_.assign(total, 0);
    stride_.resize(n);
    std::size_t s = 1;
    for (std::size_t i = 0; i < n; ++i) {
      stride_[i] = s;
      s *= static_cast<std::size_t>(R);
    }
  }

  [[nodiscard]] bool full() const { return occupied_ == cells_.size(); }
  [[nodiscard]] const std::vector<std::uint8_t>& cells() const { return cells_; }

  void add(std::span<const Int> a, Int c, double hw) {
    if (!(hw > 0.0)) return;
    std::size_t j = 0;
    for (std::size_t i = 1; i < n_; ++i) {
      if (a[i] > a[j]) j = i;
    }
    const long double aj = static_cast<long double>(a[j]) * a[j];
    if (aj == 0) return;
    const long double c2 = static_cast<long double>(c) * c;
    const long double lo_t = c2 - hw;
    const long double hi_t = c2 + hw;

    if (n_ == 2) {
      add_planar(a, c, hw, j);
      return;
    }

    std::size_t columns = 1;
    for (std::size_t i = 0; i + 1 < n_; ++i) columns *= static_cast<std::size_t>(R_);
    for (std::size_t col = 0; col < columns; ++col) {
      std::size_t rem = col;
      std::size_t base = 0;
      long double rest_lo = 0;
      long double rest_hi = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (i == j) continue;
        const auto k = static_cast<long double>(rem % static_cast<std::size_t>(R_));
        base += (rem % static_cast<std::size_t>(R_)) * stride_[i];
        rem /= static_cast<std::size_t>(R_);
        const long double ai = static_cast<long double>(a[i]) * a[i];
        rest_lo += ai * k * rho_;
        rest_hi += ai * (k + 1) * rho_;
      }
      mark_column(j, base, lo_t, hi_t, rest_lo, rest_hi, aj);
    }
  }

 private:
  // Planar fast path in box units u = R x: box (k, col) spans [k, k+1] x [col, col+1],
  // so the slab test reduces to aj(k+1) + ai(col+1) > R(c^2 - hw) and aj k + ai col < R(c^2 + hw).
  void add_planar(std::span<const Int> a, Int c, double hw, std::size_t j) {
    const std::size_t i = 1 - j;
    const double aj = static_cast<double>(a[j]) * static_cast<double>(a[j]);
    const double ai = static_cast<double>(a[i]) * static_cast<double>(a[i]);
    const double R = static_cast<double>(R_);
    const double rc2 = R * static_cast<double>(c) * static_cast<double>(c);
    const double lo = rc2 - R * hw;
    const double hi = rc2 + R * hw;
    Int col_lo = 0;
    Int col_hi = R_ - 1;
    if (ai > 0.0) {
      // The slab meets u_j in [0, R] only for (lo - aj R)/ai < u_i < hi/ai.
      col_lo = std::max<Int>(0, static_cast<Int>(std::floor((lo - aj * R) / ai)) - 1);
      col_hi = std::min<Int>(R_ - 1, static_cast<Int>(std::ceil(hi / ai)) + 1);
    }
    const std::size_t si = stride_[i];
    const std::size_t sj = stride_[j];
    for (Int col = col_lo; col <= col_hi; ++col) {
      const double rest = ai * static_cast<double>(col);
      const auto k_min = static_cast<Int>(std::floor((lo - rest - ai) / aj));
      const auto k_max = static_cast<Int>(std::ceil((hi - rest) / aj)) - 1;
      const Int from = std::max<Int>(0, k_min);
      const Int to = std::min<Int>(R_ - 1, k_max);
      std::uint8_t* base = cells_.data() + static_cast<std::size_t>(col) * si;
      for (Int k = from; k <= to; ++k) {
        std::uint8_t& cell = base[static_cast<std::size_t>(k) * sj];
        occupied_ += cell ^ 1U;
        cell = 1;
      }
    }
  }

  void mark_column(std::size_t j, std::size_t base, long double lo_t, long double hi_t, long double rest_lo,
                   long double rest_hi, long double aj) {
    // Box k is hit iff aj*(k+1)*rho + rest_hi > lo_t and aj*k*rho + rest_lo < hi_t.
    const auto k_min = static_cast<Int>(std::floor((lo_t - rest_hi) / (aj * rho_)));
    const auto k_max = static_cast<Int>(std::ceil((hi_t - rest_lo) / (aj * rho_))) - 1;
    const Int from = std::max<Int>(0, k_min);
    const Int to = std::min<Int>(R_ - 1, k_max);
    for (Int k = from; k <= to; ++k) {
      auto& cell = cells_[base + static_cast<std::size_t>(k) * stride_[j]];
      if (cell == 0) {
        cell = 1;
        ++occupied_;
      }
    }
  }

  std::size_t n_;
  Int R_;
  long double rho_;
  std::vector<std::uint8_t> cells_;
  std::vector<std::size_t> stride_;
  std::size_t occupied_ = 0;
};

/// Occupied counts at each resolution, coarsening the finest bitmap by OR.
std::vector<std::uint64_t> coarsen_counts(std::vector<std::uint8_t> cells, std::size_t n,
                                          const std::vector<int>& res) {
  std::vector<std::uint64_t> counts(res.size(), 0);
  int R = res.back();
  for (std::size_t idx = res.size(); idx-- > 0;) {
    while (R > res[idx]) {
      const int half = R / 2;
      std::size_t total = 1;
      for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(half);
      std::vector<std::uint8_t> coarse(total, 0);
      for (std::size_t fine = 0; fine < cells.size(); ++fine) {
        if (cells[fine] == 0) continue;
        std::size_t rem = fine;
        std::size_t out = 0;
        std::size_t stride = 1;
        for (std::size_t i = 0; i < n; ++i) {
          out += (rem % static_cast<std::size_t>(R)) / 2 * stride;
          rem /= static_cast<std::size_t>(R);
          stride *= static_cast<std::size_t>(half);
        }
        coarse[out] = 1;
      }
      cells = std::move(coarse);
      R = half;
    }
    counts[idx] = static_cast<std::uint64_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
  }
  return counts;
}

void fit_box_counts(BoxCountResult& out) {
  std::vector<std::size_t> use;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    out.points[i].used_in_fit = out.points[i].resolved_fraction < 0.01 && out.points[i].occupied > 0;
    if (out.points[i].used_in_fit) use.push_back(i);
  }
  if (use.size() < 3) {
    out.filter_relaxed = true;
    use.clear();
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      out.points[i].used_in_fit = out.points[i].occupied > 0;
      if (out.points[i].used_in_fit) use.push_back(i);
    }
  }
  if (use.size() < 2) throw DomainError("box counting found fewer than two occupied resolutions");
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i : use) {
    sx += std::log(static_cast<double>(out.points[i].resolution));
    sy += std::log(static_cast<double>(out.points[i].occupied));
  }
  const double mx = sx / static_cast<double>(use.size());
  const double my = sy / static_cast<double>(use.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i : use) {
    const double dx = std::log(static_cast<double>(out.points[i].resolution)) - mx;
    const double dy = std::log(static_cast<double>(out.points[i].occupied)) - my;
    sxx += dx * dx;
    sxy += dx * dy;
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.residuals.clear();
  for (std::size_t i : use) {
    const double x = std::log(static_cast<double>(out.points[i].resolution));
    out.residuals.push_back(std::log(static_cast<double>(out.points[i].occupied)) - (out.intercept + out.slope * x));
  }
}

void finish_box_count(BoxCountResult& out, Rasterizer& raster, std::size_t n, const std::vector<int>& res,
                      const std::vector<std::uint64_t>& thick_counts) {
  out.saturated = raster.full();
  std::vector<std::uint64_t> counts;
  if (out.saturated) {
    for (int r : res) counts.push_back(static_cast<std::uint64_t>(integer_power(r, n)));
  } else {
    counts = coarsen_counts(raster.cells(), n, res);
  }
  for (std::size_t i = 0; i < res.size(); ++i) {
    BoxCountPoint p;
    p.resolution = res[i];
    p.rho = 1.0 / res[i];
    p.occupied = counts[i];
    p.resolved_fraction =
        out.strip_count == 0 ? 0.0 : static_cast<double>(thick_counts[i]) / static_cast<double>(out.strip_count);
    out.points.push_back(p);
  }
  fit_box_counts(out);
}

}  // namespace

BoxCountResult box_counting_dimension(std::span<const Strip> strips, std::span<const int> resolutions) {
  if (strips.empty()) throw DomainError("box counting needs at least one strip");
  const std::size_t n = strips.front().a.dim();
  for (const auto& s : strips) {
    if (s.a.dim() != n) throw DomainError("strips of mixed dimension");
  }
  const auto res = check_resolutions(resolutions, n);
  BoxCountResult out;
  std::vector<std::uint64_t> thick(res.size(), 0);
  Rasterizer raster(n, res.back());
  for (const auto& s : strips) {
    ++out.strip_count;
    const double t = s.thickness();
    for (std::size_t i = 0; i < res.size(); ++i) thick[i] += t >= 0.5 / res[i] ? 1 : 0;
    if (!raster.full()) {
      raster.add(s.a.coords(), s.c, s.half_width);
      ++out.strips_rasterized;
    }
  }
  finish_box_count(out, raster, n, res, thick);
  return out;
}

BoxCountResult box_counting_dimension(const ApproxFunction& f, std::size_t n, Int h_lo, Int h_hi,
                                      std::span<const int> resolutions) {
  check_window(n, h_lo, h_hi, f);
  if (h_lo < 2) throw DomainError("box counting window needs h_lo >= 2");
  const auto res = check_resolutions(resolutions, n);
  BoxCountResult out;
  std::vector<std::uint64_t> thick(res.size(), 0);

  // Strips meeting [0,1]^n: 0 <= c with c^2 - psi < |a|^2 (the maximum of a^2.x).
  auto c_limit = [](const std::vector<Int>& a, double hw) {
    long double top = 0;
    for (Int v : a) top += static_cast<long double>(v) * v;
    auto c = static_cast<Int>(std::floor(std::sqrt(top + hw)));
    while (c >= 0 && static_cast<long double>(c) * c - hw >= top) --c;
    while (static_cast<long double>(c + 1) * (c + 1) - hw < top) ++c;
    return c;
  };

  for_each_window_vector(n, h_lo, h_hi, [&](const std::vector<Int>& a, Int h) {
    const double hw = f(h);
    const auto count = static_cast<std::uint64_t>(c_limit(a, hw) + 1);
    out.strip_count += count;
    const double t = 2.0 * hw / CoeffVector(a).squared_norm();
    for (std::size_t i = 0; i < res.size(); ++i) thick[i] += t >= 0.5 / res[i] ? count : 0;
  });

  Rasterizer raster(n, res.back());
  for_each_window_vector(n, h_lo, h_hi, [&](const std::vector<Int>& a, Int h) {
    if (raster.full()) return;
    const double hw = f(h);
    const Int c_max = c_limit(a, hw);
    for (Int c = 0; c <= c_max && !raster.full(); ++c) {
      raster.add(a, c, hw);
      ++out.strips_rasterized;
    }
  });
  finish_box_count(out, raster, n, res, thick);
  return out;
}

}  // namespace sqapprox
