#include "parcap/appendix.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "parcap/error.hpp"
#include "parcap/potential.hpp"
#include "parcap/quadrature.hpp"

namespace parcap {

using nlohmann::json;

void InequalityReport::finalize() {
  std::sort(rows.begin(), rows.end(),
            [](const InequalityRow& x, const InequalityRow& y) { return x.parameters < y.parameters; });
  max_ratio = 0.0;
  max_ratio_refined = 0.0;
  argmax.clear();
  bool finite = !rows.empty();
  for (const auto& r : rows) {
    if (!std::isfinite(r.ratio) || !std::isfinite(r.ratio_refined)) finite = false;
    if (r.ratio > max_ratio) {
      max_ratio = r.ratio;
      argmax = r.parameters;
    }
    max_ratio_refined = std::max(max_ratio_refined, r.ratio_refined);
  }
  refinement_change = max_ratio > 0.0 ? std::abs(max_ratio_refined / max_ratio - 1.0) : 0.0;
  pass = finite && max_ratio > 0.0 && refinement_change < stability_tol;
}

std::string InequalityReport::to_json() const {
  json j;
  j["name"] = name;
  j["sweep"] = sweep;
  j["parameter_names"] = parameter_names;
  j["max_ratio"] = max_ratio;
  j["argmax"] = argmax;
  j["max_ratio_refined"] = max_ratio_refined;
  j["refinement_change"] = refinement_change;
  j["stability_tol"] = stability_tol;
  j["pass"] = pass;
  j["rows"] = json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"parameters", r.parameters}, {"ratio", r.ratio}, {"ratio_refined", r.ratio_refined}});
  return j.dump(2);
}

void InequalityReport::write_csv(std::ostream& os) const {
  for (const auto& n : parameter_names) os << n << ',';
  os << "ratio,ratio_refined\n";
  os.precision(12);
  for (const auto& r : rows) {
    for (double p : r.parameters) os << p << ',';
    os << r.ratio << ',' << r.ratio_refined << '\n';
  }
}

// ---------------------------------------------------------------------------

double kernel_max_closed_form(double a, double b, double t, int N) {
  require(a > 0.0 && b > a && t > 0.0 && N >= 1, ErrorCode::InvalidArgument, "need 0 < a < b, t > 0, N >= 1");
  if (a / (2.0 * N) > 1.0) return std::exp(0.25) * std::pow(t, -0.5 * N) * std::exp(-0.25 * a);
  return std::exp(0.25) * std::pow(2.0 * N / (a * t), 0.5 * N) * std::exp(-0.5 * N);
}

KernelMax kernel_max(double a, double b, double t, int N, int samples, double tol) {
  require(samples >= 2, ErrorCode::InvalidArgument, "need at least two samples per axis");
  KernelMax km;
  km.value = kernel_max_closed_form(a, b, t, N);
  km.branch = a / (2.0 * N) > 1.0 ? 1 : 2;
  km.sigma = km.branch == 1 ? t : a * t / (2.0 * N);
  km.rho = std::sqrt(std::max(0.0, a * t - km.sigma));

  const double half_n = 0.5 * N;
  for (int i = 0; i < samples; ++i) {
    const double sigma = t * (i + 1.0) / samples;
    const double s_lo = std::max(a * t, sigma), s_hi = b * t;
    if (s_lo > s_hi) continue;
    const double pre = std::pow(sigma, -half_n);
    for (int j = 0; j < samples; ++j) {
      const double rho2 = s_lo + (s_hi - s_lo) * j / (samples - 1.0) - sigma;
      const double v = pre * std::exp(-std::max(0.0, rho2) / (4.0 * sigma));
      if (v > km.grid_value) {
        km.grid_value = v;
        km.grid_sigma = sigma;
        km.grid_rho = std::sqrt(std::max(0.0, rho2));
      }
    }
  }
  if (km.relative_gap() > tol) {
    std::ostringstream msg;
    msg << "closed form " << km.value << " (branch " << km.branch << ") vs grid search " << km.grid_value;
    throw Error(ErrorCode::OracleDisagreement, msg.str());
  }
  return km;
}

double kernel_max_variant_bound(double a, double t, int N, double theta) {
  require(theta >= 1.0 / (2.0 * N) && theta * a >= 1.0, ErrorCode::InvalidArgument, "need θ >= 1/2N and θa >= 1");
  return std::exp(0.25) * std::pow(2.0 * N * theta / t, 0.5 * N) * std::exp(-0.25 * a);
}

// ---------------------------------------------------------------------------

double sharp_integral_ratio(double a, double b, double A, double B, double kappa, double epsrel) {
  require(a > 0.0 && kappa > 0.0 && A > 0.0 && B > kappa / A, ErrorCode::InvalidArgument,
          "need a > 0, κ > 0, A > 0 and B > κ/A");
  const double shift = 0.25 * (A + B) * (A + B);
  // Integrand divided by the peak factor e^{-(A+B)²/4}, evaluated in log space.
  auto f = [=](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double y = 1.0 - x;
    const double L = -a * std::log(y) - b * std::log(x) - A * A / (4.0 * y) - B * B / (4.0 * x) + shift;
    return std::exp(L);
  };
  const double x0 = B / (A + B);
  const double width = std::sqrt(2.0 * A * B) / ((A + B) * (A + B));
  std::vector<double> pts{0.0, 1.0, x0};
  for (double k : {1.0, 4.0, 16.0}) {
    if (x0 - k * width > 0.0) pts.push_back(x0 - k * width);
    if (x0 + k * width < 1.0) pts.push_back(x0 + k * width);
  }
  std::sort(pts.begin(), pts.end());
  const double lhs = integrate_breaks(f, pts, 0.0, epsrel).value;
  const double envelope = std::pow(A, 1.0 - a) * std::pow(B, 1.0 - b) * std::pow(A + B, a + b - 2.0);
  return lhs / envelope;
}

IntegralSweep IntegralSweep::default_sweep() {
  IntegralSweep s;
  s.version = 1;
  s.kappa = 1.0;
  s.description = "a,b in {0.25,0.5,1,2,3}; A,B in {0.5,1,2,4,8}; AB > kappa";
  const std::vector<double> ab{0.25, 0.5, 1.0, 2.0, 3.0};
  const std::vector<double> AB{0.5, 1.0, 2.0, 4.0, 8.0};
  for (double a : ab)
    for (double b : ab)
      for (double A : AB)
        for (double B : AB)
          if (A * B > s.kappa) s.tuples.push_back({a, b, A, B});
  return s;
}

IntegralSweep IntegralSweep::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::InvalidArgument, "cannot open sweep file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, path + ": " + e.what());
  }
  IntegralSweep s;
  try {
    s.version = j.at("version").get<int>();
    s.kappa = j.at("kappa").get<double>();
    s.description = j.value("description", "");
    for (const auto& t : j.at("tuples")) {
      require(t.is_array() && t.size() == 4, ErrorCode::SchemaMismatch, "sweep tuples are [a, b, A, B]");
      s.tuples.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>(), t[3].get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, path + ": " + e.what());
  }
  require(!s.tuples.empty(), ErrorCode::SchemaMismatch, "sweep has no tuples");
  return s;
}

void IntegralSweep::save(const std::string& path) const {
  json j;
  j["version"] = version;
  j["kappa"] = kappa;
  j["description"] = description;
  std::ofstream out(path);
  require(out.good(), ErrorCode::InvalidArgument, "cannot write " + path);
  // One tuple per line keeps the file reviewable in diffs.
  std::string head = j.dump(1);
  head.erase(head.find_last_of('}'));
  while (!head.empty() && std::isspace(static_cast<unsigned char>(head.back()))) head.pop_back();
  out << head << ",\n \"tuples\": [\n";
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& t = tuples[i];
    out << "  " << json::array({t.a, t.b, t.A, t.B}).dump() << (i + 1 < tuples.size() ? ",\n" : "\n");
  }
  out << " ]\n}\n";
}

InequalityReport integral_sweep_report(const IntegralSweep& sweep, double epsrel) {
  InequalityReport rep;
  rep.name = "integral";
  rep.sweep = sweep.description + " (version " + std::to_string(sweep.version) + ", " +
              std::to_string(sweep.tuples.size()) + " tuples)";
  rep.parameter_names = {"a", "b", "A", "B"};
  for (const auto& t : sweep.tuples) {
    InequalityRow row;
    row.parameters = {t.a, t.b, t.A, t.B};
    row.ratio = sharp_integral_ratio(t.a, t.b, t.A, t.B, sweep.kappa, epsrel);
    row.ratio_refined = sharp_integral_ratio(t.a, t.b, t.A, t.B, sweep.kappa, 0.1 * epsrel);
    rep.rows.push_back(row);
  }
  rep.finalize();
  return rep;
}

double integral_symmetry_defect(const IntegralSweep& sweep, double epsrel) {
  double worst = 0.0;
  for (const auto& t : sweep.tuples) {
    if (!(t.A > sweep.kappa / t.B)) continue;
    double r1 = sharp_integral_ratio(t.a, t.b, t.A, t.B, sweep.kappa, epsrel);
    double r2 = sharp_integral_ratio(t.b, t.a, t.B, t.A, sweep.kappa, epsrel);
    worst = std::max(worst, std::abs(r1 / r2 - 1.0));
  }
  return worst;
}

// ---------------------------------------------------------------------------

double series_bound_ratio(double alpha, double beta, double gamma, double delta, int ell, int n) {
  require(gamma > 1.0 && delta > 0.0 && ell >= 2 && n > ell, ErrorCode::InvalidArgument,
          "need γ > 1, δ > 0, ℓ >= 2 and n > ℓ");
  const double sn = std::sqrt(static_cast<double>(n));
  const double sg = std::sqrt(gamma);
  double sum = 0.0;
  // Each term is scaled by e^{δn}, so the division by e^{-δn} never underflows.
  for (int p = 1; p <= n - ell; ++p) {
    const double sp = std::sqrt(static_cast<double>(p));
    const double z = sp + sg * (sn - std::sqrt(p + 1.0));
    sum += std::pow(p, alpha) * std::pow(sn - sp, beta) * std::exp(-delta * z * z + delta * n);
  }
  return sum / std::pow(n, alpha - 0.5 * beta);
}

InequalityReport series_bound_report(double alpha, double beta, double gamma, double delta, int ell,
                                     const std::vector<int>& ns, double spread_limit) {
  InequalityReport rep;
  rep.name = "series";
  std::ostringstream d;
  d << "alpha=" << alpha << " beta=" << beta << " gamma=" << gamma << " delta=" << delta << " ell=" << ell;
  rep.sweep = d.str();
  rep.parameter_names = {"n"};
  double lo = std::numeric_limits<double>::infinity();
  for (int n : ns) {
    InequalityRow row;
    row.parameters = {static_cast<double>(n)};
    row.ratio = series_bound_ratio(alpha, beta, gamma, delta, ell, n);
    row.ratio_refined = row.ratio;  // direct summation has nothing to refine
    lo = std::min(lo, row.ratio);
    rep.rows.push_back(row);
  }
  rep.finalize();
  rep.pass = rep.pass && lo > 0.0 && rep.max_ratio / lo < spread_limit;
  return rep;
}

// ---------------------------------------------------------------------------

WienerReport wiener_upper_consistency(const ClosedSet& K, double r, double rho, const SolverConfig& cfg,
                                      const std::vector<Point>& xs, const std::vector<double>& ts,
                                      const MaximalOptions& options, const CapacityOptions& cap_options) {
  const auto& P = cfg.params;
  require(P.supercritical, ErrorCode::InvalidArgument, "the Wiener estimate needs q >= q_c");
  require(K.bounded(), ErrorCode::UnboundedSet, "K must be compact");
  require(r > 0.0 && rho > 0.0, ErrorCode::InvalidArgument, "need r, ρ > 0");
  require(cfg.T >= (r + rho) * (r + rho), ErrorCode::InvalidArgument, "need T >= (r+ρ)²");
  require(K.is_empty() || K.diameter_from(Point(P.N, 0.0)) <= r * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "K must lie in B_r(0)");

  WienerReport rep;
  rep.degenerate = true;
  CapacityOptions co = cap_options;
  co.refine_bracket = false;
  NumericCapacityBackend cap(P, co);
  const double local = K.is_empty() ? 0.0 : local_vs_global_capacity(K, r, rho, P, co).local;

  for (int level = 0; level < 2; ++level) {
    SolverConfig c = cfg;
    c.h = level == 0 ? cfg.h : 0.5 * cfg.h;
    if (cfg.dt > 0.0) c.dt = level == 0 ? cfg.dt : 0.25 * cfg.dt;
    c.parabolic_radius = r + rho;
    WienerLevel lvl;
    lvl.h = c.h;
    lvl.local_capacity = local;
    auto res = maximal_solution(K, c, ts, options);
    for (std::size_t j = 0; j < res.times.size(); ++j) {
      for (const auto& x : xs) {
        WienerProbe pr;
        pr.x = x;
        pr.t = res.times[j];
        pr.u = probe(res.final_fields()[j], c, x);
        pr.sum = W_series(K, x, pr.t, P, cap);
        if (pr.sum > 0.0) {
          rep.degenerate = false;
          pr.ratio = pr.u / pr.sum;
          lvl.fitted_constant = std::max(lvl.fitted_constant, pr.ratio);
        }
        lvl.probes.push_back(pr);
      }
    }
    // Energy of the last approximation u_{k, K_ε}.
    GridFunction u0 = neighbourhood_indicator(K, options.eps_list.back(), c);
    for (double& v : u0.values) v *= res.levels.back().k_used;
    auto tr = solve_cauchy(u0, c, {c.T});
    lvl.energy = tr.absorbed_exterior() + tr.history.back().mass;
    lvl.energy_ratio = local > 0.0 ? lvl.energy / local : 0.0;
    rep.levels.push_back(std::move(lvl));
  }
  auto drift = [](double x, double y) { return x > 0.0 ? std::abs(y / x - 1.0) : (y == 0.0 ? 0.0 : 1.0); };
  rep.constant_drift = drift(rep.levels[0].fitted_constant, rep.levels[1].fitted_constant);
  rep.energy_drift = drift(rep.levels[0].energy_ratio, rep.levels[1].energy_ratio);
  rep.stable = rep.constant_drift < rep.drift_tol && rep.energy_drift < rep.drift_tol;
  return rep;
}

}  // namespace parcap
