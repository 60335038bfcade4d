#include "parcap/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "parcap/appendix.hpp"
#include "parcap/error.hpp"
#include "parcap/heat.hpp"
#include "parcap/potential.hpp"

namespace parcap {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchema = "parcap.experiment/1";

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaMismatch, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw Error(ErrorCode::SchemaMismatch, "unknown key '" + k + "' in " + where);
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, where + "." + key + ": " + e.what());
  }
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

Point point_of(const Json& j, int N, const std::string& where) {
  Point p;
  if (j.is_number()) {
    p.assign(N, 0.0);
    p[0] = j.get<double>();
  } else {
    p = j.get<Point>();
  }
  if (static_cast<int>(p.size()) != N) throw Error(ErrorCode::SchemaMismatch, where + ": point has wrong dimension");
  return p;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

void write_text(const ExperimentConfig& cfg, ExperimentResult& res, const std::string& file, const std::string& text) {
  if (cfg.output_dir.empty()) return;
  fs::create_directories(cfg.output_dir);
  const std::string path = (fs::path(cfg.output_dir) / file).string();
  std::ofstream out(path);
  require(out.good(), ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
  res.files.push_back(path);
}

Json points_json(const std::vector<Point>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(x);
  return a;
}

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Capacity: return "capacity";
    case ExperimentKind::Potential: return "potential";
    case ExperimentKind::Solve: return "solve";
    case ExperimentKind::Sandwich: return "sandwich";
    case ExperimentKind::Profile: return "profile";
    case ExperimentKind::Appendix: return "appendix";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::Capacity, ExperimentKind::Potential, ExperimentKind::Solve, ExperimentKind::Sandwich,
                 ExperimentKind::Profile, ExperimentKind::Appendix})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::SchemaMismatch, "unknown experiment '" + s + "'");
}

ClosedSet set_from_json(const Json& j, int N) {
  const std::string where = "set";
  if (!j.is_object() || !j.contains("kind")) throw Error(ErrorCode::SchemaMismatch, "set needs a 'kind'");
  const auto kind = get<std::string>(j, "kind", where);
  if (kind == "empty") {
    check_keys(j, {"kind"}, where);
    return ClosedSet::empty(N);
  }
  if (kind == "point") {
    check_keys(j, {"kind", "center"}, where);
    return ClosedSet::point(j.contains("center") ? point_of(j["center"], N, where) : Point(N, 0.0));
  }
  if (kind == "ball") {
    check_keys(j, {"kind", "center", "radius"}, where);
    return ClosedSet::ball(j.contains("center") ? point_of(j["center"], N, where) : Point(N, 0.0),
                           get<double>(j, "radius", where));
  }
  if (kind == "annulus") {
    check_keys(j, {"kind", "center", "r_in", "r_out"}, where);
    return ClosedSet::annulus(j.contains("center") ? point_of(j["center"], N, where) : Point(N, 0.0),
                              get<double>(j, "r_in", where), get<double>(j, "r_out", where));
  }
  if (kind == "interval") {
    check_keys(j, {"kind", "lo", "hi"}, where);
    require(N == 1, ErrorCode::InvalidArgument, "intervals need N = 1");
    return ClosedSet::interval(get<double>(j, "lo", where), get<double>(j, "hi", where));
  }
  if (kind == "box") {
    check_keys(j, {"kind", "lo", "hi"}, where);
    return ClosedSet::box(point_of(j["lo"], N, where), point_of(j["hi"], N, where));
  }
  if (kind == "cantor") {
    check_keys(j, {"kind", "lo", "hi", "ratio", "depth"}, where);
    require(N == 1, ErrorCode::InvalidArgument, "Cantor sets need N = 1");
    return ClosedSet::cantor(get<double>(j, "lo", where), get<double>(j, "hi", where), get<double>(j, "ratio", where),
                             get<int>(j, "depth", where));
  }
  if (kind == "union") {
    check_keys(j, {"kind", "members"}, where);
    std::vector<ClosedSet> members;
    for (const auto& m : j.at("members")) members.push_back(set_from_json(m, N));
    return ClosedSet::unite(std::move(members));
  }
  throw Error(ErrorCode::SchemaMismatch, "unknown set kind '" + kind + "'");
}

double GoldenTolerances::for_field(const std::string& key) const {
  auto it = fields.find(key);
  return it == fields.end() ? default_rel : it->second;
}

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  check_keys(j, {"schema", "name", "experiment", "params", "set", "grid", "probes", "capacity", "maximal", "refine",
                 "data", "profile", "appendix", "output", "tolerances"},
             "config");
  if (get<std::string>(j, "schema", "config") != kSchema)
    throw Error(ErrorCode::SchemaMismatch, std::string("config schema must be ") + kSchema);
  ExperimentConfig c;
  read(j, "name", c.name, "config");
  c.kind = experiment_kind_from_string(get<std::string>(j, "experiment", "config"));
  const Json& p = j.at("params");
  check_keys(p, {"N", "q"}, "params");
  c.params = ProblemParams::make(get<int>(p, "N", "params"), get<double>(p, "q", "params"));
  if (j.contains("set")) c.set = j["set"];
  if (j.contains("grid")) {
    const Json& g = j["grid"];
    check_keys(g, {"geometry", "boundary", "h", "dt", "T", "lo", "hi", "R"}, "grid");
    if (g.contains("geometry")) {
      auto s = get<std::string>(g, "geometry", "grid");
      require(s == "line" || s == "radial", ErrorCode::SchemaMismatch, "grid.geometry is line or radial");
      c.geometry = s == "line" ? Geometry::Line : Geometry::Radial;
    }
    if (g.contains("boundary")) {
      auto s = get<std::string>(g, "boundary", "grid");
      require(s == "dirichlet" || s == "neumann", ErrorCode::SchemaMismatch, "grid.boundary is dirichlet or neumann");
      c.boundary = s == "neumann" ? Boundary::Neumann : Boundary::Dirichlet;
    }
    read(g, "h", c.h, "grid");
    read(g, "dt", c.dt, "grid");
    read(g, "T", c.T, "grid");
    read(g, "lo", c.lo, "grid");
    read(g, "hi", c.hi, "grid");
    read(g, "R", c.R, "grid");
  }
  if (j.contains("probes")) {
    const Json& pr = j["probes"];
    check_keys(pr, {"x", "t"}, "probes");
    if (pr.contains("x"))
      for (const auto& x : pr["x"]) c.xs.push_back(point_of(x, c.params.N, "probes.x"));
    read(pr, "t", c.ts, "probes");
  }
  if (j.contains("capacity")) {
    const Json& cp = j["capacity"];
    check_keys(cp, {"solver", "closed_form", "h"}, "capacity");
    if (cp.contains("solver")) {
      auto s = get<std::string>(cp, "solver", "capacity");
      require(s == "dual" || s == "primal", ErrorCode::SchemaMismatch, "capacity.solver is dual or primal");
      c.capacity_solver = s == "dual" ? CapacitySolver::DualNewton : CapacitySolver::PrimalGradient;
    }
    read(cp, "closed_form", c.closed_form, "capacity");
    read(cp, "h", c.capacity_h, "capacity");
  }
  if (j.contains("maximal")) {
    const Json& m = j["maximal"];
    check_keys(m, {"k", "eps", "tol_k"}, "maximal");
    read(m, "k", c.maximal.k_list, "maximal");
    read(m, "eps", c.maximal.eps_list, "maximal");
    read(m, "tol_k", c.maximal.tol_k, "maximal");
  }
  read(j, "refine", c.refine, "config");
  if (j.contains("data")) {
    const Json& d = j["data"];
    check_keys(d, {"kind", "value", "width"}, "data");
    read(d, "kind", c.data, "data");
    read(d, "value", c.data_value, "data");
    read(d, "width", c.data_width, "data");
  }
  if (j.contains("profile")) {
    const Json& pf = j["profile"];
    check_keys(pf, {"kind"}, "profile");
    auto s = get<std::string>(pf, "kind", "profile");
    require(s == "radial" || s == "halfline", ErrorCode::SchemaMismatch, "profile.kind is radial or halfline");
    c.profile = s == "radial" ? ProfileKind::RadialVSS : ProfileKind::HalfLine;
  }
  if (j.contains("appendix")) {
    const Json& a = j["appendix"];
    check_keys(a, {"lemma", "sweep", "seed"}, "appendix");
    read(a, "lemma", c.lemma, "appendix");
    read(a, "sweep", c.sweep, "appendix");
    read(a, "seed", c.seed, "appendix");
  }
  if (j.contains("output")) {
    const Json& o = j["output"];
    check_keys(o, {"dir", "plots"}, "output");
    read(o, "dir", c.output_dir, "output");
    read(o, "plots", c.plots, "output");
  }
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    check_keys(t, {"default", "abs_floor", "fields"}, "tolerances");
    read(t, "default", c.tolerances.default_rel, "tolerances");
    read(t, "abs_floor", c.tolerances.abs_floor, "tolerances");
    if (t.contains("fields"))
      for (const auto& [k, v] : t["fields"].items()) c.tolerances.fields[k] = v.get<double>();
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::InvalidArgument, "cannot open config " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, path + ": " + e.what());
  }
  return from_json(j);
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["schema"] = kSchema;
  j["name"] = name;
  j["experiment"] = to_string(kind);
  j["params"] = {{"N", params.N}, {"q", params.q}};
  if (set) j["set"] = *set;
  j["grid"] = {{"geometry", geometry == Geometry::Line ? "line" : "radial"},
               {"boundary", boundary == Boundary::Neumann ? "neumann" : "dirichlet"},
               {"h", h}, {"dt", dt}, {"T", T}, {"lo", lo}, {"hi", hi}, {"R", R}};
  j["probes"] = {{"x", points_json(xs)}, {"t", ts}};
  j["capacity"] = {{"solver", capacity_solver == CapacitySolver::DualNewton ? "dual" : "primal"},
                   {"closed_form", closed_form}, {"h", capacity_h}};
  j["maximal"] = {{"k", maximal.k_list}, {"eps", maximal.eps_list}, {"tol_k", maximal.tol_k}};
  j["refine"] = refine;
  j["data"] = {{"kind", data}, {"value", data_value}, {"width", data_width}};
  j["profile"] = {{"kind", profile == ProfileKind::RadialVSS ? "radial" : "halfline"}};
  j["appendix"] = {{"lemma", lemma}, {"sweep", sweep}, {"seed", seed}};
  j["output"] = {{"dir", output_dir}, {"plots", plots}};
  Json fields = Json::object();
  for (const auto& [k, v] : tolerances.fields) fields[k] = v;
  j["tolerances"] = {{"default", tolerances.default_rel}, {"abs_floor", tolerances.abs_floor}, {"fields", fields}};
  return j;
}

SolverConfig ExperimentConfig::solver() const {
  SolverConfig s = geometry == Geometry::Line ? SolverConfig::line(params, lo, hi, h, T)
                                              : SolverConfig::radial(params, R, h, T);
  s.dt = dt;
  s.boundary = boundary;
  return s;
}

ClosedSet ExperimentConfig::closed_set() const {
  require(set.has_value(), ErrorCode::InvalidArgument, "experiment needs a set");
  return set_from_json(*set, params.N);
}

void ExperimentConfig::validate() const {
  const bool pde = kind == ExperimentKind::Solve || kind == ExperimentKind::Sandwich ||
                   (kind == ExperimentKind::Appendix && lemma == "wiener");
  if (pde) {
    auto s = solver();
    for (const auto& x : xs) {
      double c = s.coordinate(x);
      bool inside = geometry == Geometry::Line ? (c >= lo && c <= hi) : c <= R;
      require(inside, ErrorCode::InvalidArgument, "probe outside the solver box");
    }
    for (double t : ts) require(t > 0.0 && t <= T, ErrorCode::InvalidArgument, "probe times must lie in (0, T]");
  }
  switch (kind) {
    case ExperimentKind::Capacity:
      closed_set();
      if (closed_form)
        require(params.supercritical, ErrorCode::InvalidArgument, "closed-form capacities need q >= q_c");
      break;
    case ExperimentKind::Potential:
    case ExperimentKind::Sandwich:
      closed_set();
      require(params.supercritical, ErrorCode::InvalidArgument, "potentials are compared for q >= q_c");
      require(!xs.empty() && !ts.empty(), ErrorCode::InvalidArgument, "need probes");
      break;
    case ExperimentKind::Solve:
      require(data == "flat" || data == "gaussian" || data == "dirac", ErrorCode::InvalidArgument,
              "data is flat, gaussian or dirac");
      require(!ts.empty(), ErrorCode::InvalidArgument, "need probe times");
      break;
    case ExperimentKind::Profile:
      if (profile == ProfileKind::RadialVSS)
        require(params.q < params.qc, ErrorCode::NoProfileRegime, "radial profile needs 1 < q < q_c");
      else
        require(params.q < 3.0, ErrorCode::NoProfileRegime, "half-line profile needs 1 < q < 3");
      break;
    case ExperimentKind::Appendix:
      require(lemma == "kernest" || lemma == "integral" || lemma == "series" || lemma == "spherical" ||
                  lemma == "wiener",
              ErrorCode::InvalidArgument, "lemma is kernest, integral, series, spherical or wiener");
      if (lemma == "integral" && sweep != "default")
        require(fs::exists(sweep), ErrorCode::InvalidArgument, "sweep file not found: " + sweep);
      if (lemma == "wiener") {
        closed_set();
        require(params.supercritical, ErrorCode::InvalidArgument, "the Wiener estimate needs q >= q_c");
      }
      break;
  }
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

CapacityOptions capacity_options(const ExperimentConfig& cfg, double scale = 1.0) {
  CapacityOptions co;
  co.solver = cfg.capacity_solver;
  if (cfg.capacity_h > 0.0) co.h = cfg.capacity_h * scale;
  else co.h_default *= scale;
  return co;
}

ExperimentResult run_capacity(const ExperimentConfig& cfg) {
  ExperimentResult res;
  ClosedSet K = cfg.closed_set();
  Json& s = res.summary;
  CapacityEstimate est;
  double mass = std::numeric_limits<double>::quiet_NaN();
  if (cfg.closed_form) {
    est = capacity_closed_form(K, cfg.params);
  } else {
    auto co = capacity_options(cfg);
    co.refine_bracket = cfg.refine;
    auto prob = CapacityProblem::make(K, cfg.params, co);
    est = capacity_numeric(prob);
    if (!K.is_empty()) mass = capacitary_measure(prob).total_mass();
  }
  s["value"] = est.value;
  s["bracket_lo"] = est.bracket_lo;
  s["bracket_hi"] = est.bracket_hi;
  s["method"] = to_string(est.method);
  s["h"] = est.h;
  s["iterations"] = est.iterations;
  bool ok = std::isfinite(est.value) && est.bracket_lo <= est.value * (1 + 1e-12) &&
            est.value <= est.bracket_hi * (1 + 1e-12);
  if (std::isfinite(mass)) {
    s["capacitary_mass"] = mass;
    double ratio = est.value > 0.0 ? mass / est.value : 1.0;
    s["mass_ratio"] = ratio;
    ok = ok && std::abs(ratio - 1.0) <= 0.05;
  }
  res.pass = ok;
  return res;
}

ExperimentResult run_potential(const ExperimentConfig& cfg) {
  ExperimentResult res;
  ClosedSet F = cfg.closed_set();
  NumericCapacityBackend cap(cfg.params, capacity_options(cfg), cfg.closed_form);
  auto rep = equivalence_report(F, cfg.xs, cfg.ts, cfg.params, cap);
  Json& s = res.summary;
  s["min_ratio"] = rep.min_ratio;
  s["max_ratio"] = rep.max_ratio;
  s["tail_constant"] = rep.tail_constant;
  s["all_finite_positive"] = rep.all_finite_positive;
  bool ok = rep.all_finite_positive;
  std::ostringstream csv;
  rep.write_csv(csv);
  write_text(cfg, res, "equivalence.csv", csv.str());
  if (cfg.refine) {
    NumericCapacityBackend cap2(cfg.params, capacity_options(cfg, 0.5), cfg.closed_form);
    IntegralOptions io;
    io.panels *= 2;
    auto fine = equivalence_report(F, cfg.xs, cfg.ts, cfg.params, cap2, io);
    double drift = 0.0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
      if (rep.rows[i].ratio > 0.0) drift = std::max(drift, std::abs(fine.rows[i].ratio / rep.rows[i].ratio - 1.0));
    double tail_drift = rep.tail_constant > 0.0 ? std::abs(fine.tail_constant / rep.tail_constant - 1.0) : 0.0;
    s["refined_min_ratio"] = fine.min_ratio;
    s["refined_max_ratio"] = fine.max_ratio;
    s["refined_tail_constant"] = fine.tail_constant;
    s["ratio_drift"] = drift;
    s["tail_constant_drift"] = tail_drift;
    ok = ok && fine.all_finite_positive && drift < 0.25 && tail_drift < 0.30;
    std::ostringstream csv2;
    fine.write_csv(csv2);
    write_text(cfg, res, "equivalence_refined.csv", csv2.str());
  }
  if (cfg.plots && !cfg.output_dir.empty() && cfg.params.N == 1) {
    std::vector<PlotSeries> ser;
    for (double t : cfg.ts) {
      PlotSeries p{"t=" + fmt(t), {}, {}};
      for (const auto& r : rep.rows)
        if (r.t == t) {
          p.x.push_back(r.x[0]);
          p.y.push_back(r.ratio);
        }
      ser.push_back(p);
    }
    write_text(cfg, res, "equivalence.svg", svg_line_plot("W_integral / W_series", "x", "ratio", ser));
  }
  res.pass = ok;
  return res;
}

ExperimentResult run_solve(const ExperimentConfig& cfg) {
  ExperimentResult res;
  auto sc = cfg.solver();
  auto g = sc.grid();
  GridFunction u0(g, 0.0);
  u0.time = 0.0;
  const double q = cfg.params.q;
  if (cfg.data == "flat") {
    std::fill(u0.values.begin(), u0.values.end(), cfg.data_value);
  } else if (cfg.data == "gaussian") {
    for (std::size_t i = 0; i < g.size(); ++i) {
      double x = g.lo[0] + g.h * static_cast<double>(i);
      u0.values[i] = cfg.data_value * std::pow(4.0 * std::numbers::pi * cfg.data_width, -0.5 * cfg.params.N) *
                     std::exp(-x * x / (4.0 * cfg.data_width));
    }
  } else {
    u0 = discretize(RadonMeasure::dirac(Point(sc.geometry == Geometry::Line ? 1 : cfg.params.N, 0.0), cfg.data_value),
                    sc);
  }
  auto tr = solve_cauchy(u0, sc, cfg.ts);
  std::vector<Point> xs = cfg.xs.empty() ? std::vector<Point>{Point(cfg.params.N, 0.0)} : cfg.xs;
  auto rows = probe_table(tr, xs);
  std::ostringstream csv;
  write_probe_csv(csv, rows);
  write_text(cfg, res, "probes.csv", csv.str());
  double worst_slack = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) worst_slack = std::min(worst_slack, r.slack / r.bound);
  Json& s = res.summary;
  s["min_relative_slack"] = worst_slack;
  const double m0 = tr.history.front().mass, mT = tr.history.back().mass;
  const double absorbed = tr.absorbed(0.0, sc.T);
  s["mass_initial"] = m0;
  s["mass_final"] = mT;
  s["absorbed"] = absorbed;
  s["mass_identity_residual"] = m0 > 0.0 ? std::abs(m0 - mT - absorbed) / m0 : 0.0;
  bool ok = worst_slack >= -1e-6;
  if (cfg.data == "flat") {
    double err = 0.0;
    for (const auto& snap : tr.snapshots) {
      double t = *snap.time;
      double exact = std::pow((q - 1.0) * t + std::pow(cfg.data_value, 1.0 - q), -1.0 / (q - 1.0));
      for (double v : snap.values) err = std::max(err, std::abs(v / exact - 1.0));
    }
    s["flat_relative_error"] = err;
    ok = ok && err <= 1e-3;
  }
  for (std::size_t j = 0; j < tr.snapshots.size(); ++j) {
    std::ostringstream snap;
    write_snapshot_csv(snap, tr.snapshots[j], sc);
    write_text(cfg, res, "snapshot_" + std::to_string(j) + ".csv", snap.str());
  }
  if (cfg.plots && !cfg.output_dir.empty()) {
    std::vector<PlotSeries> ser;
    for (const auto& snap : tr.snapshots) {
      PlotSeries p{"t=" + fmt(*snap.time), {}, snap.values};
      for (std::size_t i = 0; i < snap.values.size(); ++i) p.x.push_back(g.lo[0] + g.h * static_cast<double>(i));
      ser.push_back(std::move(p));
    }
    write_text(cfg, res, "snapshots.svg", svg_line_plot("u(x, t)", sc.geometry == Geometry::Line ? "x" : "|x|", "u", ser));
  }
  res.pass = ok;
  return res;
}

ExperimentResult run_sandwich(const ExperimentConfig& cfg) {
  ExperimentResult res;
  ClosedSet F = cfg.closed_set();
  auto sc = cfg.solver();
  NumericCapacityBackend cap(cfg.params, capacity_options(cfg), cfg.closed_form);
  auto rep = bilateral_check(F, sc, cap, cfg.xs, cfg.ts, cfg.maximal);
  Json& s = res.summary;
  s["min_ratio"] = rep.min_ratio;
  s["max_ratio"] = rep.max_ratio;
  s["spread"] = rep.spread();
  s["anomalies"] = rep.anomalies;
  s["finite_positive"] = rep.finite_positive;
  std::ostringstream csv;
  rep.write_csv(csv);
  write_text(cfg, res, "sandwich.csv", csv.str());
  bool ok = rep.finite_positive && rep.anomalies == 0;
  if (cfg.refine) {
    SolverConfig fine = sc;
    fine.h *= 0.5;
    fine.dt *= 0.25;
    NumericCapacityBackend cap2(cfg.params, capacity_options(cfg, 0.5), cfg.closed_form);
    auto rep2 = bilateral_check(F, fine, cap2, cfg.xs, cfg.ts, cfg.maximal);
    double drift = rep.spread() > 0.0 ? std::abs(rep2.spread() / rep.spread() - 1.0) : 1.0;
    s["refined_min_ratio"] = rep2.min_ratio;
    s["refined_max_ratio"] = rep2.max_ratio;
    s["refined_spread"] = rep2.spread();
    s["spread_drift"] = drift;
    ok = ok && rep2.finite_positive && rep2.anomalies == 0 && drift < 0.5;
    std::ostringstream csv2;
    rep2.write_csv(csv2);
    write_text(cfg, res, "sandwich_refined.csv", csv2.str());
  }
  if (cfg.plots && !cfg.output_dir.empty()) {
    std::vector<PlotSeries> ser;
    for (double t : cfg.ts) {
      PlotSeries p{"t=" + fmt(t), {}, {}};
      for (const auto& r : rep.rows)
        if (r.t == t && r.W > 0.0) {
          p.x.push_back(sc.coordinate(r.x));
          p.y.push_back(r.ratio);
        }
      ser.push_back(p);
    }
    write_text(cfg, res, "sandwich.svg", svg_line_plot("u_F / W_F", "|x|", "ratio", ser));
  }
  res.pass = ok;
  return res;
}

ExperimentResult run_profile(const ExperimentConfig& cfg) {
  ExperimentResult res;
  auto prof = very_singular_profile(cfg.params, cfg.profile);
  Json& s = res.summary;
  s["kind"] = cfg.profile == ProfileKind::RadialVSS ? "radial" : "halfline";
  s["dim"] = prof.dim;
  s["f0"] = prof.f0();
  s["tail_constant"] = prof.tail_constant;
  s["y_max"] = prof.y.back();
  std::ostringstream csv;
  csv << "y,f,fp\n" << std::setprecision(12);
  for (std::size_t i = 0; i < prof.y.size(); i += 10) csv << prof.y[i] << ',' << prof.f[i] << ',' << prof.fp[i] << '\n';
  write_text(cfg, res, "profile.csv", csv.str());
  if (cfg.plots && !cfg.output_dir.empty()) {
    PlotSeries p{"f", {}, {}};
    for (std::size_t i = 0; i < prof.y.size(); i += 10) {
      p.x.push_back(prof.y[i]);
      p.y.push_back(prof.f[i]);
    }
    write_text(cfg, res, "profile.svg", svg_line_plot("self-similar profile", "y", "f", {p}));
  }
  res.pass = prof.f0() > 0.0 && std::isfinite(prof.tail_constant);
  return res;
}

ExperimentResult run_appendix(const ExperimentConfig& cfg) {
  ExperimentResult res;
  Json& s = res.summary;
  s["lemma"] = cfg.lemma;
  if (cfg.lemma == "kernest") {
    std::mt19937_64 rng(cfg.seed);
    InequalityReport rep;
    rep.name = "kernest";
    rep.sweep = "20 seeded (a, b, t, N) tuples, both branches";
    rep.parameter_names = {"a", "b", "t", "N", "branch"};
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const int N = 1 + static_cast<int>(unit(rng) * 3.0);
      const double t = 0.1 + 1.9 * unit(rng);
      const double a = i % 2 == 0 ? 2.0 * N * (1.0 + 2.0 * unit(rng)) : 2.0 * N * (0.1 + 0.9 * unit(rng));
      const double b = a * (1.5 + 2.5 * unit(rng));
      InequalityRow row;
      try {
        auto km = kernel_max(a, b, t, N);
        row.parameters = {a, b, t, static_cast<double>(N), static_cast<double>(km.branch)};
        row.ratio = km.grid_value / km.value;
        worst = std::max(worst, km.relative_gap());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OracleDisagreement) throw;
        row.parameters = {a, b, t, static_cast<double>(N), 0.0};
        ok = false;
      }
      row.ratio_refined = row.ratio;
      rep.rows.push_back(row);
    }
    rep.finalize();
    s["report"] = Json::parse(rep.to_json());
    s["max_relative_gap"] = worst;
    res.pass = ok && worst <= 5e-3;
    std::ostringstream csv;
    rep.write_csv(csv);
    write_text(cfg, res, "kernest.csv", csv.str());
  } else if (cfg.lemma == "integral") {
    auto sweep = cfg.sweep == "default" ? IntegralSweep::default_sweep() : IntegralSweep::load(cfg.sweep);
    auto rep = integral_sweep_report(sweep);
    double sym = integral_symmetry_defect(sweep);
    Json r = Json::parse(rep.to_json());
    r.erase("rows");
    s["report"] = r;
    s["tuples"] = sweep.tuples.size();
    s["symmetry_defect"] = sym;
    res.pass = rep.pass && sweep.tuples.size() >= 200 && sym <= 1e-6;
    std::ostringstream csv;
    rep.write_csv(csv);
    write_text(cfg, res, "integral.csv", csv.str());
  } else if (cfg.lemma == "series") {
    const std::vector<int> ns{10, 20, 40, 80};
    auto r0 = series_bound_report(1.0, 0.0, 2.0, 0.25, 2, ns);
    auto r1 = series_bound_report(1.0, -1.0, 2.0, 0.25, 2, ns);
    s["beta0"] = Json::parse(r0.to_json());
    s["beta_minus1"] = Json::parse(r1.to_json());
    res.pass = r0.pass && r1.pass;
  } else if (cfg.lemma == "spherical") {
    double q_err = 0.0;
    for (double m : {0.1, 1.0, 5.0, 20.0})
      q_err = std::max(q_err, std::abs(spherical_integral(3, m) / (2.0 * std::sinh(m) / m) - 1.0));
    double lit = 0.0, fixed = 0.0;
    for (int N : {6, 7})
      for (double m : {0.1, 1.0, 5.0, 20.0}) {
        const double I = spherical_integral(N, m);
        lit = std::max(lit, std::abs(spherical_recursion_factored(N, m) / I - 1.0));
        fixed = std::max(fixed, std::abs(spherical_recursion(N, m) / I - 1.0));
      }
    double env = 0.0;
    bool finite = true;
    for (int N : {2, 3, 4, 5, 6, 7})
      for (double m = 0.5; m <= 200.0; m += 0.5) {
        double v = spherical_envelope_ratio(N, m);
        finite = finite && std::isfinite(v);
        env = std::max(env, v);
      }
    s["i3_relative_error"] = q_err;
    s["recursion_residual_as_stated"] = lit;
    s["recursion_residual_corrected"] = fixed;
    s["envelope_max"] = env;
    res.pass = q_err <= 1e-9 && lit <= 1e-9 && finite;
  } else {
    ClosedSet K = cfg.closed_set();
    auto bb = K.bbox();
    double r = 0.0;
    require(bb.has_value(), ErrorCode::UnboundedSet, "K must be compact");
    for (std::size_t i = 0; i < bb->lo.size(); ++i) r = std::max({r, std::abs(bb->lo[i]), std::abs(bb->hi[i])});
    r = std::max(r, 1e-3);
    const double rho = r;
    auto sc = cfg.solver();
    sc.T = std::max(sc.T, 4.0 * r * r);
    auto rep = wiener_upper_consistency(K, r, rho, sc, cfg.xs, cfg.ts, cfg.maximal, capacity_options(cfg));
    Json lv = Json::array();
    for (const auto& l : rep.levels)
      lv.push_back({{"h", l.h}, {"fitted_constant", l.fitted_constant}, {"energy", l.energy},
                    {"local_capacity", l.local_capacity}, {"energy_ratio", l.energy_ratio}});
    s["levels"] = lv;
    s["constant_drift"] = rep.constant_drift;
    s["energy_drift"] = rep.energy_drift;
    s["degenerate"] = rep.degenerate;
    res.pass = rep.stable || rep.degenerate;
  }
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  switch (cfg.kind) {
    case ExperimentKind::Capacity: res = run_capacity(cfg); break;
    case ExperimentKind::Potential: res = run_potential(cfg); break;
    case ExperimentKind::Solve: res = run_solve(cfg); break;
    case ExperimentKind::Sandwich: res = run_sandwich(cfg); break;
    case ExperimentKind::Profile: res = run_profile(cfg); break;
    case ExperimentKind::Appendix: res = run_appendix(cfg); break;
  }
  Json out;
  out["experiment"] = to_string(cfg.kind);
  out["name"] = cfg.name;
  out["params"] = {{"N", cfg.params.N}, {"q", cfg.params.q}};
  if (cfg.set) out["set"] = *cfg.set;
  for (auto& [k, v] : res.summary.items()) out[k] = v;
  out["pass"] = res.pass;
  res.summary = std::move(out);
  write_text(cfg, res, "summary.json", res.summary.dump(2) + "\n");
  return res;
}

// ---------------------------------------------------------------------------
// Golden files

namespace {

void compare(const Json& a, const Json& b, const std::string& path, const std::string& leaf,
             const GoldenTolerances& tol, GoldenResult& out) {
  auto fail = [&](const std::string& msg) {
    out.pass = false;
    out.differences.push_back((path.empty() ? "<root>" : path) + ": " + msg);
  };
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    const double rel = tol.for_field(leaf);
    if (std::isnan(x) && std::isnan(y)) return;
    if (std::abs(x - y) > rel * std::max(std::abs(x), std::abs(y)) + tol.abs_floor)
      fail("value " + fmt(x) + " differs from golden " + fmt(y) + " (rel tol " + fmt(rel) + ")");
    return;
  }
  if (a.type() != b.type()) {
    fail(std::string("schema mismatch: type ") + a.type_name() + " vs golden " + b.type_name());
    return;
  }
  if (a.is_object()) {
    for (const auto& [k, v] : b.items())
      if (!a.contains(k)) fail("schema mismatch: missing key '" + k + "'");
    for (const auto& [k, v] : a.items()) {
      if (!b.contains(k)) {
        fail("schema mismatch: unexpected key '" + k + "'");
        continue;
      }
      compare(v, b[k], path.empty() ? k : path + "." + k, k, tol, out);
    }
  } else if (a.is_array()) {
    if (a.size() != b.size()) {
      fail("schema mismatch: length " + std::to_string(a.size()) + " vs golden " + std::to_string(b.size()));
      return;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
      compare(a[i], b[i], path + "[" + std::to_string(i) + "]", leaf, tol, out);
  } else if (a != b) {
    fail("value " + a.dump() + " differs from golden " + b.dump());
  }
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::InvalidArgument, "cannot open " + path);
  try {
    Json j;
    in >> j;
    return j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, path + ": " + e.what());
  }
}

}  // namespace

GoldenResult golden_compare(const Json& run, const Json& golden, const GoldenTolerances& tol) {
  GoldenResult out;
  compare(run, golden, "", "", tol, out);
  return out;
}

GoldenResult golden_compare_files(const std::string& run_path, const std::string& golden_path,
                                  const GoldenTolerances& tol) {
  return golden_compare(load_json(run_path), load_json(golden_path), tol);
}

// ---------------------------------------------------------------------------
// SVG

std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<PlotSeries>& series, bool log_y) {
  constexpr double W = 640, H = 400, L = 70, Rm = 140, Tm = 40, B = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (log_y && !(s.y[i] > 0.0)) continue;
      if (!std::isfinite(s.y[i]) || !std::isfinite(s.x[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - Rm); };
  auto py = [&](double y) { return H - B - (ty(y) - ymin) / (ymax - ymin) * (H - B - Tm); };
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - Rm << "\" height=\"" << H - B - Tm
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(xmin) << "</text>\n";
  os << "<text x=\"" << W - Rm << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(xmax) << "</text>\n";
  const std::string pre = log_y ? "1e" : "";
  os << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" text-anchor=\"end\">" << pre << fmt(ymin) << "</text>\n";
  os << "<text x=\"" << L - 6 << "\" y=\"" << Tm + 10 << "\" text-anchor=\"end\">" << pre << fmt(ymax) << "</text>\n";
  os << "<text x=\"" << (L + W - Rm) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << (Tm + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (Tm + H - B) / 2 << ")\">" << ylabel << (log_y ? " (log10)" : "") << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 7];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (log_y && !(s.y[i] > 0.0)) continue;
      if (!std::isfinite(s.y[i])) continue;
      os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = Tm + 14 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << W - Rm + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - Rm + 30 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - Rm + 36 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace parcap
