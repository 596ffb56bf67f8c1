#include "sqapprox/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqapprox/lattice.hpp"
#include "sqapprox/measure.hpp"
#include "sqapprox/strips.hpp"
#include "sqapprox/wave.hpp"

namespace sqapprox::cli {

namespace {

using ojson = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Reports

struct Report {
  Report() = default;
  explicit Report(std::string cmd) : command(std::move(cmd)) {}

  std::string command;
  ojson config = ojson::object();
  std::vector<std::string> columns;
  std::vector<std::vector<ojson>> rows;
  ojson results = ojson::object();
  std::vector<std::string> warnings;
};

std::string csv_cell(const ojson& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "nan";
  return v.dump();
}

std::string render(const Report& r, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = r.command;
    j["config"] = r.config;
    j["columns"] = r.columns;
    j["rows"] = ojson::array();
    for (const auto& row : r.rows) j["rows"].push_back(row);
    j["results"] = r.results;
    j["warnings"] = r.warnings;
    os << j.dump(2) << '\n';
    return os.str();
  }
  os << "# config: " << r.config.dump() << '\n';
  for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
  if (!r.columns.empty()) os << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << '\n';
  }
  for (const auto& [k, v] : r.results.items()) os << "# " << k << '=' << csv_cell(v) << '\n';
  for (const auto& w : r.warnings) os << "# warning=" << w << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Flag value parsing

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("malformed number '" + s + "'");
}

Int parse_int(const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("malformed integer '" + s + "'");
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part));
  return out;
}

std::vector<Int> parse_ints(const std::string& s) {
  std::vector<Int> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_int(part));
  return out;
}

std::pair<Int, Int> parse_range(const std::string& s) {
  auto parts = split(s, ':');
  if (parts.size() != 2) throw UsageError("expected a range lo:hi, got '" + s + "'");
  return {parse_int(parts[0]), parse_int(parts[1])};
}

/// "lo:hi" (every power of two in between) or an explicit comma list.
std::vector<int> parse_resolutions(const std::string& s) {
  std::vector<int> out;
  if (s.find(':') != std::string::npos) {
    auto [lo, hi] = parse_range(s);
    if (lo < 2 || hi < lo) throw UsageError("resolution range needs 2 <= lo <= hi");
    for (Int r = lo; r <= hi; r *= 2) out.push_back(static_cast<int>(r));
    if (out.back() != hi) throw UsageError("resolution range must be a power-of-two ladder");
    return out;
  }
  for (Int v : parse_ints(s)) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<ExactReal> parse_reals(const std::string& s) {
  std::vector<ExactReal> out;
  for (const auto& part : split(s, ',')) out.push_back(ExactReal::parse(part));
  return out;
}

ojson vector_json(std::span<const Int> v) { return ojson(std::vector<Int>(v.begin(), v.end())); }

void push_coords(std::vector<ojson>& row, std::span<const Int> v) {
  for (Int x : v) row.emplace_back(x);
}

void coord_columns(std::vector<std::string>& cols, const std::string& prefix, std::size_t n) {
  for (std::size_t i = 1; i <= n; ++i) cols.push_back(prefix + std::to_string(i));
}

// ---------------------------------------------------------------------------
// Shared option groups

struct GridOptions {
  int resolution = 256;
  std::string rule = "center";
  unsigned threads = 1;

  [[nodiscard]] GridSpec spec() const {
    GridSpec g;
    g.resolution = resolution;
    g.rule = SampleRule::parse(rule);
    g.threads = threads;
    return g;
  }
  void describe(ojson& cfg) const {
    cfg["res"] = resolution;
    cfg["rule"] = rule;
  }
};

struct BallOptions {
  std::string center;  // empty: (0.5, ..., 0.5)
  double radius = 0.2;
  double eps = 0.25;

  [[nodiscard]] Ball ball(std::size_t n) const {
    Ball b = Ball::standard(n);
    if (!center.empty()) b.center = parse_doubles(center);
    if (b.center.size() != n) throw UsageError("ball center must have n coordinates");
    b.radius = radius;
    b.eps = eps;
    validate_region(b);
    return b;
  }
  void describe(ojson& cfg, const Ball& b) const {
    cfg["center"] = b.center;
    cfg["radius"] = b.radius;
    cfg["eps"] = b.eps;
  }
};

void add_grid_options(CLI::App* sub, GridOptions& g) {
  sub->add_option("--res", g.resolution, "grid cells per axis (power of two >= 16)")->capture_default_str();
  sub->add_option("--rule", g.rule, "sampling rule: center, sub:<k> or rows")->capture_default_str();
}

void add_ball_options(CLI::App* sub, BallOptions& b) {
  sub->add_option("--center", b.center, "ball center, comma separated (default 0.5,...)");
  sub->add_option("--radius", b.radius, "ball radius")->capture_default_str();
  sub->add_option("--eps", b.eps, "shaved-cube margin eps")->capture_default_str();
}

void psi_config(ojson& cfg, const std::string& psi) { cfg["psi"] = psi; }

// ---------------------------------------------------------------------------
// Subcommands

Report cmd_solutions(const std::string& x_text, const std::string& psi, Int h_max, std::size_t n) {
  const auto x = parse_doubles(x_text);
  if (x.size() != n) throw UsageError("--x needs " + std::to_string(n) + " coordinates");
  const auto f = ApproxFunction::parse(psi);
  const auto sols = solutions_at_point(x, f, h_max);
  Report r("solutions");
  r.config["x"] = x;
  psi_config(r.config, psi);
  r.config["hmax"] = h_max;
  r.config["n"] = n;
  r.columns.push_back("h");
  coord_columns(r.columns, "a", n);
  r.columns.insert(r.columns.end(), {"c", "residual"});
  for (const auto& s : sols) {
    std::vector<ojson> row{s.a.height()};
    push_coords(row, s.a.coords());
    row.emplace_back(s.c);
    row.emplace_back(s.residual);
    r.rows.push_back(std::move(row));
  }
  r.results["count"] = sols.size();
  return r;
}

Report cmd_dichotomy(const std::string& psi, std::size_t n, Int H, std::optional<double> s) {
  const auto f = ApproxFunction::parse(psi);
  Report r("dichotomy");
  psi_config(r.config, psi);
  r.config["n"] = n;
  r.config["H"] = H;
  if (s) {
    const auto nd = static_cast<double>(n);
    if (!(*s > nd - 1.0 && *s < nd)) throw UsageError("--s must lie in (n-1, n)");
    r.config["s"] = *s;
    const auto rep = hausdorff_sum(f, n, *s, H);
    r.columns = {"H", "s", "sum"};
    for (const auto& p : rep.hausdorff_sums) r.rows.push_back({p.H, p.s, p.sum});
    r.results["final_sum"] = rep.hausdorff_sums.back().sum;
    r.results["verdict"] = to_string(rep.verdict_hint);
    return r;
  }
  const auto rep = khintchine_sum(f, n, H);
  r.columns = {"H", "sum"};
  for (const auto& p : rep.partial_sums) r.rows.push_back({p.H, p.sum});
  r.results["final_sum"] = rep.partial_sums.back().sum;
  r.results["verdict"] = to_string(rep.verdict_hint);
  return r;
}

void estimate_results(Report& r, const MeasureEstimate& e) {
  r.results["estimate"] = e.value;
  r.results["coarse_warning"] = e.coarse_warning;
  r.results["min_thickness"] = e.min_thickness;
  r.results["sample_spacing"] = e.sample_spacing;
  if (e.coarse_warning) r.warnings.emplace_back("strips thinner than two sample spacings");
}

struct MeasureArgs {
  std::string psi = "pow:1.2";
  std::size_t n = 2;
  std::string a;
  std::string window;
  std::string region = "omega";
  Int sample = 0;
  std::string hrange = "32:256";
  GridOptions grid;
  BallOptions ball;
};

Report cmd_measure(const MeasureArgs& m, std::uint64_t seed) {
  const auto f = ApproxFunction::parse(m.psi);
  const GridSpec grid = m.grid.spec();
  Report r("measure");
  psi_config(r.config, m.psi);
  r.config["n"] = m.n;
  m.grid.describe(r.config);
  const int modes = (m.a.empty() ? 0 : 1) + (m.window.empty() ? 0 : 1) + (m.sample > 0 ? 1 : 0);
  if (modes != 1) throw UsageError("measure needs exactly one of --a, --window or --sample");

  if (!m.a.empty()) {
    const CoeffVector a(parse_ints(m.a));
    if (a.dim() != m.n) throw UsageError("--a needs n coordinates");
    const Ball b = m.ball.ball(m.n);
    r.config["a"] = vector_json(a.coords());
    m.ball.describe(r.config, b);
    const auto s = union_measure_over_c(a, f, b, grid);
    estimate_results(r, s.estimate);
    r.results["lower"] = s.lower;
    r.results["upper"] = s.upper;
    r.results["within"] = s.within();
    return r;
  }
  if (!m.window.empty()) {
    auto [lo, hi] = parse_range(m.window);
    Region region;
    if (m.region == "omega") {
      region = ShavedCube{m.ball.eps, m.n};
    } else if (m.region == "cube") {
      region = UnitCube{m.n};
    } else if (m.region == "ball") {
      region = m.ball.ball(m.n);
    } else {
      throw UsageError("--region must be omega, cube or ball");
    }
    r.config["window"] = m.window;
    r.config["region"] = m.region;
    r.config["eps"] = m.ball.eps;
    const auto e = window_union_measure(f, m.n, lo, hi, region, grid);
    estimate_results(r, e);
    r.results["region_volume"] = region_volume(region);
    return r;
  }

  auto [lo, hi] = parse_range(m.hrange);
  const Ball b = m.ball.ball(m.n);
  r.config["sample"] = m.sample;
  r.config["hrange"] = m.hrange;
  r.config["seed"] = seed;
  m.ball.describe(r.config, b);
  const auto pool = enumerate_sieved(lo, hi, SieveConfig{}, m.n);
  std::vector<CoeffVector> picked;
  std::mt19937_64 rng(seed);
  std::sample(pool.begin(), pool.end(), std::back_inserter(picked), static_cast<std::size_t>(m.sample), rng);
  r.columns.push_back("h");
  coord_columns(r.columns, "a", m.n);
  r.columns.insert(r.columns.end(), {"estimate", "lower", "upper", "within", "coarse_warning"});
  bool all_within = true;
  bool coarse = false;
  for (const auto& a : picked) {
    const auto s = union_measure_over_c(a, f, b, grid);
    std::vector<ojson> row{a.height()};
    push_coords(row, a.coords());
    row.insert(row.end(), {s.estimate.value, s.lower, s.upper, s.within(), s.estimate.coarse_warning});
    r.rows.push_back(std::move(row));
    all_within = all_within && s.within();
    coarse = coarse || s.estimate.coarse_warning;
  }
  r.results["all_within"] = all_within;
  r.results["coarse_warning"] = coarse;
  if (coarse) r.warnings.emplace_back("strips thinner than two sample spacings");
  return r;
}

Report cmd_bc(const std::string& psi, std::size_t n, Int H, const GridOptions& g, const BallOptions& bo) {
  const auto f = ApproxFunction::parse(psi);
  const Ball b = bo.ball(n);
  Report r("bc");
  psi_config(r.config, psi);
  r.config["n"] = n;
  r.config["H"] = H;
  g.describe(r.config);
  bo.describe(r.config, b);
  const auto st = bc_statistics(H, f, b, g.spec());
  r.results["S1"] = st.S1;
  r.results["S2"] = st.S2;
  r.results["vectors"] = st.vector_count;
  r.results["ball_volume"] = b.volume();
  if (st.ratio) {
    r.results["ratio"] = *st.ratio;
    r.results["ratio_over_volume"] = *st.ratio / b.volume();
  } else {
    r.results["ratio"] = "nodata";
    r.warnings.emplace_back("no data: S2 = 0");
  }
  r.results["coarse_warning"] = st.coarse_warning;
  if (st.coarse_warning) r.warnings.emplace_back("strips thinner than two sample spacings");
  return r;
}

Report cmd_boxdim(const std::string& psi, std::size_t n, const std::string& window, const std::string& res) {
  const auto f = ApproxFunction::parse(psi);
  auto [lo, hi] = parse_range(window);
  const auto ladder = parse_resolutions(res);
  Report r("boxdim");
  psi_config(r.config, psi);
  r.config["n"] = n;
  r.config["window"] = window;
  r.config["res"] = res;
  const auto out = box_counting_dimension(f, n, lo, hi, ladder);
  r.columns = {"resolution", "rho", "occupied", "resolved_fraction", "used_in_fit"};
  for (const auto& p : out.points) r.rows.push_back({p.resolution, p.rho, p.occupied, p.resolved_fraction, p.used_in_fit});
  r.results["slope"] = out.slope;
  r.results["intercept"] = out.intercept;
  r.results["saturated"] = out.saturated;
  r.results["filter_relaxed"] = out.filter_relaxed;
  r.results["strip_count"] = out.strip_count;
  r.results["strips_rasterized"] = out.strips_rasterized;
  if (out.filter_relaxed) r.warnings.emplace_back("thickness filter left fewer than 3 points; fitted all");
  if (out.saturated) r.warnings.emplace_back("every box at the finest resolution is occupied");
  return r;
}

struct WaveArgs {
  std::string params_file;
  std::string deltas;
  std::string alphas;
  std::string beta = "1";
};

WaveParams wave_params(const WaveArgs& w, ojson& cfg) {
  const int given = (w.params_file.empty() ? 0 : 1) + (w.deltas.empty() ? 0 : 1) + (w.alphas.empty() ? 0 : 1);
  if (given != 1) throw UsageError("give exactly one of --params, --deltas or --alphas");
  WaveParams p = [&] {
    if (!w.params_file.empty()) {
      std::ifstream in(w.params_file);
      if (!in) throw UsageError("cannot open " + w.params_file);
      std::stringstream ss;
      ss << in.rdbuf();
      return WaveParams::from_json(ss.str());
    }
    const ExactReal beta = ExactReal::parse(w.beta);
    if (!w.deltas.empty()) return WaveParams::from_deltas(parse_reals(w.deltas), beta);
    return WaveParams::from_alphas(parse_reals(w.alphas), beta);
  }();
  cfg["params"] = ojson::parse(p.to_json());
  return p;
}

Report cmd_wave_solve(const WaveArgs& w, const std::string& field_file, double min_den) {
  Report r("wave-solve");
  const WaveParams p = wave_params(w, r.config);
  r.config["field"] = field_file;
  r.config["min_den"] = min_den;
  std::ifstream in(field_file);
  if (!in) throw UsageError("cannot open " + field_file);
  const auto f = FourierField::read_json_lines(in, p.dim());
  const auto u = solve_wave(f, p, min_den);
  coord_columns(r.columns, "a", p.dim());
  r.columns.insert(r.columns.end(), {"b", "re", "im"});
  for (const auto& [m, v] : u.modes()) {
    std::vector<ojson> row;
    push_coords(row, m.a);
    row.insert(row.end(), {m.b, v.real(), v.imag()});
    r.rows.push_back(std::move(row));
  }
  r.results["modes"] = u.size();
  r.results["hermitian"] = u.is_hermitian();
  return r;
}

Report cmd_scan(const WaveArgs& w, double C, double wexp, Int h_max) {
  Report r("scan");
  const WaveParams p = wave_params(w, r.config);
  r.config["C"] = C;
  r.config["w"] = wexp;
  r.config["hmax"] = h_max;
  const auto hits = resonance_scan(p, {C, wexp, h_max});
  r.columns.push_back("h");
  coord_columns(r.columns, "a", p.dim());
  r.columns.insert(r.columns.end(), {"b", "D", "threshold", "margin"});
  for (const auto& h : hits) {
    std::vector<ojson> row{h.height()};
    push_coords(row, h.a);
    row.insert(row.end(), {h.b, h.D, h.threshold, h.margin});
    r.rows.push_back(std::move(row));
  }
  r.results["count"] = hits.size();
  r.results["exact"] = p.exact();
  return r;
}

// ---------------------------------------------------------------------------
// --config: a JSON object whose keys are long option names; its values are
// inserted right after the subcommand name, so flags given explicitly on the
// command line (which come later and are resolved TakeLast) still win.

std::vector<std::string> expand_config(std::vector<std::string> args, const std::vector<std::string>& commands) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  ojson cfg;
  try {
    cfg = ojson::parse(in);
  } catch (const ojson::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config must be a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back("--" + key);
      continue;
    }
    tokens.push_back("--" + key);
    if (value.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < value.size(); ++i) joined += (i ? "," : "") + csv_cell(value[i]);
      tokens.push_back(joined);
    } else {
      tokens.push_back(csv_cell(value));
    }
  }
  auto at = std::find_first_of(args.begin(), args.end(), commands.begin(), commands.end());
  if (at != args.end()) ++at;
  args.insert(at, tokens.begin(), tokens.end());
  return args;
}

}  // namespace

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diophantine approximation by squares: strips, measures, dichotomies and a periodic wave solver"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.name("sqapprox");
  app.fallthrough();  // global flags may follow the subcommand

  std::string format = "csv";
  std::string output;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool strict = false;
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--output", output, "write the report to this file");
  app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (never changes results)")->capture_default_str();
  app.add_flag("--strict", strict, "exit 4 when an estimator raises a warning");
  app.add_option("--config", "JSON object of option overrides");  // consumed before parsing

  auto* sol = app.add_subcommand("solutions", "all (a, c) with |a^2.x - c^2| < psi(h_a)");
  std::string sol_x;
  std::string sol_psi;
  Int sol_hmax = 0;
  std::size_t sol_n = 2;
  sol->add_option("--x", sol_x, "point, comma separated")->required();
  sol->add_option("--psi", sol_psi, "pow:<v> or table:<path>")->required();
  sol->add_option("--hmax", sol_hmax, "largest height")->required();
  sol->add_option("--n", sol_n, "dimension")->capture_default_str();

  auto* dich = app.add_subcommand("dichotomy", "partial sums of the convergence criteria");
  std::string d_psi;
  std::size_t d_n = 2;
  Int d_H = 65536;
  std::optional<double> d_s;
  dich->add_option("--psi", d_psi, "pow:<v> or table:<path>")->required();
  dich->add_option("--n", d_n, "dimension")->capture_default_str();
  dich->add_option("--H", d_H, "largest height")->capture_default_str();
  dich->add_option("--s", d_s, "Hausdorff exponent s in (n-1, n)");

  auto* meas = app.add_subcommand("measure", "grid estimates of strip-union measures");
  MeasureArgs m;
  meas->add_option("--psi", m.psi, "pow:<v> or table:<path>")->capture_default_str();
  meas->add_option("--n", m.n, "dimension")->capture_default_str();
  meas->add_option("--a", m.a, "one coefficient vector: measure of its strips in the ball");
  meas->add_option("--window", m.window, "height window lo:hi: measure of the union over all a");
  meas->add_option("--region", m.region, "region for --window: omega, cube or ball")->capture_default_str();
  meas->add_option("--sample", m.sample, "number of seeded sieved vectors to measure");
  meas->add_option("--hrange", m.hrange, "height range lo:hi for --sample")->capture_default_str();
  add_grid_options(meas, m.grid);
  add_ball_options(meas, m.ball);

  auto* bc = app.add_subcommand("bc", "Borel-Cantelli statistics S1, S2 and S1^2/S2");
  std::string bc_psi = "pow:1";
  std::size_t bc_n = 2;
  Int bc_H = 64;
  GridOptions bc_grid;
  BallOptions bc_ball;
  bc->add_option("--psi", bc_psi, "pow:<v> or table:<path>")->capture_default_str();
  bc->add_option("--n", bc_n, "dimension")->capture_default_str();
  bc->add_option("--H", bc_H, "largest height")->capture_default_str();
  add_grid_options(bc, bc_grid);
  add_ball_options(bc, bc_ball);

  auto* box = app.add_subcommand("boxdim", "box-counting dimension of a windowed strip union");
  std::string bx_psi = "pow:2";
  std::size_t bx_n = 2;
  std::string bx_window = "16:256";
  std::string bx_res = "64:4096";
  box->add_option("--psi", bx_psi, "pow:<v> or table:<path>")->capture_default_str();
  box->add_option("--n", bx_n, "dimension")->capture_default_str();
  box->add_option("--window", bx_window, "height window lo:hi")->capture_default_str();
  box->add_option("--res", bx_res, "resolutions lo:hi (powers of two) or a comma list")->capture_default_str();

  auto add_wave_options = [](CLI::App* sub, WaveArgs& w) {
    sub->add_option("--params", w.params_file, "JSON file {\"alphas\"|\"deltas\": [...], \"beta\": x}");
    sub->add_option("--deltas", w.deltas, "ratios beta^2/alpha_i^2, comma separated (p/q is exact)");
    sub->add_option("--alphas", w.alphas, "spatial periods, comma separated");
    sub->add_option("--beta", w.beta, "temporal period")->capture_default_str();
  };

  auto* ws = app.add_subcommand("wave-solve", "solve u_tt - Δu = f mode by mode");
  WaveArgs ws_args;
  std::string ws_field;
  double ws_min = 1e-8;
  add_wave_options(ws, ws_args);
  ws->add_option("--field", ws_field, "source field as JSON lines")->required();
  ws->add_option("--min-den", ws_min, "smallest admissible |D|")->capture_default_str();

  auto* scan = app.add_subcommand("scan", "modes with |D| < C h^-w");
  WaveArgs sc_args;
  double sc_C = 1.0;
  double sc_w = 2.0;
  Int sc_hmax = 16;
  add_wave_options(scan, sc_args);
  scan->add_option("--C", sc_C, "threshold constant")->capture_default_str();
  scan->add_option("--w", sc_w, "threshold exponent (> 1)")->capture_default_str();
  scan->add_option("--hmax", sc_hmax, "largest height")->capture_default_str();

  Report report;
  try {
    std::vector<std::string> commands;
    for (const auto* sub : app.get_subcommands({})) commands.push_back(sub->get_name());
    auto args = expand_config(raw_args, commands);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    m.grid.threads = threads;
    bc_grid.threads = threads;

    if (*sol) {
      report = cmd_solutions(sol_x, sol_psi, sol_hmax, sol_n);
    } else if (*dich) {
      report = cmd_dichotomy(d_psi, d_n, d_H, d_s);
    } else if (*meas) {
      report = cmd_measure(m, seed);
    } else if (*bc) {
      report = cmd_bc(bc_psi, bc_n, bc_H, bc_grid, bc_ball);
    } else if (*box) {
      report = cmd_boxdim(bx_psi, bx_n, bx_window, bx_res);
    } else if (*ws) {
      report = cmd_wave_solve(ws_args, ws_field, ws_min);
    } else {
      report = cmd_scan(sc_args, sc_C, sc_w, sc_hmax);
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NonZeroMeanSource& e) {
    err << "error: " << e.what() << '\n';
    return kResonance;
  } catch (const ResonantMode& e) {
    err << "error: " << e.what() << '\n';
    return kResonance;
  } catch (const NearResonance& e) {
    err << "error: " << e.what() << '\n';
    return kResonance;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  const std::string text = render(report, format);
  if (output.empty()) {
    out << text;
  } else {
    std::ofstream file(output, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << output << '\n';
      return kUsage;
    }
    file << text;
  }
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  if (strict && !report.warnings.empty()) return kWarning;
  return kSuccess;
}

}  // namespace sqapprox::cli
