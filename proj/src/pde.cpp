#include "parcap/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include "parcap/error.hpp"
#include "parcap/potential.hpp"

namespace parcap {

namespace {

double sphere_area(int N) {
  // 2 π^{N/2} / Γ(N/2); equals 2 for N = 1.
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

// u^e for the exponents that occur in practice, avoiding pow where possible.
double ipow(double u, double e) {
  if (e == 1.0) return u;
  if (e == 2.0) return u * u;
  if (e == 3.0) return u * u * u;
  if (e == 4.0) return (u * u) * (u * u);
  return std::pow(u, e);
}

double absorb_exact(double u, double q, double dt) {
  if (u <= 0.0) return 0.0;
  const double x = (q - 1.0) * dt * ipow(u, q - 1.0);
  if (q == 2.0) return u / (1.0 + x);
  if (q == 3.0) return u / std::sqrt(1.0 + x);
  if (q == 4.0) return u / std::cbrt(1.0 + x);
  return u * std::pow(1.0 + x, -1.0 / (q - 1.0));
}

double absorb_backward_euler(double u, double q, double dt) {
  if (u <= 0.0) return 0.0;
  // g(v) = v + dt v^q - u is convex and increasing; Newton from an upper bound decreases monotonically.
  double v = std::min(u, std::pow(u / dt, 1.0 / q));
  for (int it = 0; it < 50; ++it) {
    double g = v + dt * ipow(v, q) - u;
    double dg = 1.0 + q * dt * ipow(v, q - 1.0);
    double nv = v - g / dg;
    if (nv <= 0.0) nv = 0.5 * v;
    if (std::abs(nv - v) <= 1e-15 * std::max(1.0, v)) return nv;
    v = nv;
  }
  throw Error(ErrorCode::PointwiseSolveFailed, "Newton for v + dt v^q = u did not converge in 50 iterations");
}

// Control volumes V_i and face areas A_{i+1/2} (sphere area factored out).
struct FiniteVolumes {
  std::vector<double> V;
  std::vector<double> A_right;  // face between i and i+1; last entry is the outer face
  double A_left0 = 0.0;         // face left of node 0
};

FiniteVolumes finite_volumes(const SolverConfig& cfg, std::size_t n) {
  FiniteVolumes fv;
  fv.V.resize(n);
  fv.A_right.resize(n);
  const double h = cfg.h;
  if (cfg.geometry == Geometry::Line) {
    std::fill(fv.V.begin(), fv.V.end(), h);
    std::fill(fv.A_right.begin(), fv.A_right.end(), 1.0);
    fv.A_left0 = cfg.boundary == Boundary::Dirichlet ? 1.0 : 0.0;
  } else {
    const int N = cfg.params.N;
    for (std::size_t i = 0; i < n; ++i) {
      double r = h * static_cast<double>(i);
      double a = std::max(0.0, r - 0.5 * h), b = r + 0.5 * h;
      fv.V[i] = (std::pow(b, N) - std::pow(a, N)) / N;
      fv.A_right[i] = std::pow(b, N - 1);
    }
    fv.A_left0 = 0.0;
  }
  if (cfg.boundary == Boundary::Neumann) fv.A_right[n - 1] = 0.0;
  return fv;
}

// LU factors of I - dt Δ_h, reused for every step of a run.
class Diffusion {
 public:
  Diffusion(const SolverConfig& cfg, std::size_t n, double dt) : n_(n) {
    auto fv = finite_volumes(cfg, n);
    const double h = cfg.h;
    lower_.assign(n, 0.0);
    diag_.assign(n, 1.0);
    upper_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double c = dt / (h * fv.V[i]);
      double aL = i == 0 ? fv.A_left0 : fv.A_right[i - 1];
      double aR = fv.A_right[i];
      diag_[i] += c * (aL + aR);
      if (i > 0) lower_[i] = -c * aL;
      if (i + 1 < n) upper_[i] = -c * aR;
    }
    // Thomas factorization.
    cprime_.assign(n, 0.0);
    denom_.assign(n, 0.0);
    denom_[0] = diag_[0];
    cprime_[0] = upper_[0] / denom_[0];
    for (std::size_t i = 1; i < n; ++i) {
      denom_[i] = diag_[i] - lower_[i] * cprime_[i - 1];
      cprime_[i] = upper_[i] / denom_[i];
    }
  }

  void solve(std::vector<double>& u) const {
    u[0] /= denom_[0];
    for (std::size_t i = 1; i < n_; ++i) u[i] = (u[i] - lower_[i] * u[i - 1]) / denom_[i];
    for (std::size_t i = n_ - 1; i-- > 0;) u[i] -= cprime_[i] * u[i + 1];
  }

 private:
  std::size_t n_;
  std::vector<double> lower_, diag_, upper_, cprime_, denom_;
};

void absorb(std::vector<double>& u, const SolverConfig& cfg, double dt) {
  const double q = cfg.params.q;
  switch (cfg.absorption) {
    case Absorption::ExactFlow:
      for (double& v : u) v = absorb_exact(std::max(0.0, v), q, dt);
      break;
    case Absorption::BackwardEuler:
      for (double& v : u) v = absorb_backward_euler(std::max(0.0, v), q, dt);
      break;
    case Absorption::Off:
      for (double& v : u) v = std::max(0.0, v);
      break;
  }
}

double weighted_sum(const std::vector<double>& w, const std::vector<double>& u, double e) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * ipow(u[i], e);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

SolverConfig SolverConfig::line(const ProblemParams& params, double lo, double hi, double h, double T) {
  SolverConfig c;
  c.params = params;
  c.geometry = Geometry::Line;
  c.lo = lo;
  c.hi = hi;
  c.h = h;
  c.T = T;
  c.validate();
  return c;
}

SolverConfig SolverConfig::radial(const ProblemParams& params, double R, double h, double T) {
  SolverConfig c;
  c.params = params;
  c.geometry = Geometry::Radial;
  c.lo = 0.0;
  c.hi = R;
  c.h = h;
  c.T = T;
  c.validate();
  return c;
}

void SolverConfig::validate() const {
  require(h > 0.0 && dt >= 0.0 && T > 0.0, ErrorCode::InvalidArgument, "solver needs h, T > 0 and dt >= 0");
  if (geometry == Geometry::Line) {
    require(params.N == 1, ErrorCode::InvalidArgument, "line geometry is one-dimensional");
    require(hi > lo, ErrorCode::InvalidArgument, "line needs lo < hi");
  } else {
    require(hi > 0.0, ErrorCode::InvalidArgument, "radial geometry needs R > 0");
  }
  require(grid().size() >= 3, ErrorCode::InvalidArgument, "grid needs at least three nodes");
}

UniformGrid SolverConfig::grid() const {
  UniformGrid g;
  g.h = h;
  g.lo = {geometry == Geometry::Line ? lo : 0.0};
  double extent = (geometry == Geometry::Line ? hi - lo : hi);
  g.n = {static_cast<int>(std::floor(extent / h + 1e-9)) + 1};
  return g;
}

double SolverConfig::coordinate(const Point& x) const {
  if (geometry == Geometry::Line) {
    require(x.size() == 1, ErrorCode::InvalidArgument, "line probes are one-dimensional");
    return x[0];
  }
  require(static_cast<int>(x.size()) == params.N, ErrorCode::InvalidArgument, "probe has wrong dimension");
  return norm(x);
}

std::vector<double> SolverConfig::mass_weights() const {
  auto g = grid();
  auto fv = finite_volumes(*this, g.size());
  if (geometry == Geometry::Radial) {
    const double w = sphere_area(params.N);
    for (double& v : fv.V) v *= w;
  }
  return fv.V;
}

double Trajectory::absorbed(double s, double T) const {
  require(s <= T, ErrorCode::InvalidArgument, "need s <= T");
  double acc = 0.0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    double a = std::max(s, history[i - 1].t), b = std::min(T, history[i].t);
    if (b <= a) continue;
    double span = history[i].t - history[i - 1].t;
    auto at = [&](double x) {
      double w = (x - history[i - 1].t) / span;
      return (1.0 - w) * history[i - 1].q_mass + w * history[i].q_mass;
    };
    acc += 0.5 * (b - a) * (at(a) + at(b));
  }
  return acc;
}

double Trajectory::absorbed_exterior() const {
  require(cfg.parabolic_radius.has_value(), ErrorCode::InvalidArgument, "no parabolic radius configured");
  double acc = 0.0;
  for (std::size_t i = 1; i < history.size(); ++i)
    acc += 0.5 * (history[i].t - history[i - 1].t) * (history[i].q_mass_exterior + history[i - 1].q_mass_exterior);
  return acc;
}

double Trajectory::mass_at(double t) const {
  require(!history.empty(), ErrorCode::IncompleteHistory, "empty trajectory");
  if (t <= history.front().t) return history.front().mass;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (t <= history[i].t) {
      double w = (t - history[i - 1].t) / (history[i].t - history[i - 1].t);
      return (1.0 - w) * history[i - 1].mass + w * history[i].mass;
    }
  }
  return history.back().mass;
}

// ---------------------------------------------------------------------------
// Time stepping

GridFunction step(const GridFunction& u, const SolverConfig& cfg, double dt) {
  require(dt > 0.0, ErrorCode::InvalidArgument, "time step must be positive");
  auto g = cfg.grid();
  require(u.values.size() == g.size(), ErrorCode::InvalidArgument, "grid function does not match the solver grid");
  for (double v : u.values) require(v >= 0.0, ErrorCode::InvalidArgument, "step needs u >= 0");
  GridFunction out = u;
  Diffusion diff(cfg, g.size(), dt);
  absorb(out.values, cfg, 0.5 * dt);
  diff.solve(out.values);
  absorb(out.values, cfg, 0.5 * dt);
  if (out.time) *out.time += dt;
  return out;
}

GridFunction step(const GridFunction& u, const SolverConfig& cfg) { return step(u, cfg, cfg.time_step()); }

GridFunction discretize(const RadonMeasure& mu, const SolverConfig& cfg) {
  mu.validate();
  auto g = cfg.grid();
  GridFunction u(g, 0.0);
  u.time = 0.0;
  u.nonnegative = true;
  auto w = cfg.mass_weights();
  const int n = g.n[0];
  for (const auto& a : mu.atoms) {
    if (a.mass == 0.0) continue;
    double s = (cfg.coordinate(a.location) - g.lo[0]) / g.h;
    require(s >= -1e-9 && s <= n - 1 + 1e-9, ErrorCode::InvalidArgument, "atom lies outside the solver box");
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
    double f = std::clamp(s - i, 0.0, 1.0);
    u.values[i] += a.mass * (1.0 - f) / w[i];
    u.values[i + 1] += a.mass * f / w[i + 1];
  }
  if (mu.density) {
    for (int i = 0; i < n; ++i) {
      Point x(mu.density->grid.dim(), 0.0);
      x[0] = g.lo[0] + g.h * i;
      u.values[i] += interpolate(*mu.density, x);
    }
  }
  return u;
}

Trajectory solve_cauchy(const GridFunction& u0, const SolverConfig& cfg, const std::vector<double>& times) {
  cfg.validate();
  auto g = cfg.grid();
  require(u0.values.size() == g.size(), ErrorCode::InvalidArgument, "initial data does not match the solver grid");
  for (double v : u0.values)
    require(v >= 0.0 && std::isfinite(v), ErrorCode::InvalidArgument, "initial data must be finite and >= 0");
  std::vector<double> stops = times;
  std::sort(stops.begin(), stops.end());
  for (double s : stops) require(s > 0.0 && s <= cfg.T * (1.0 + 1e-12), ErrorCode::InvalidArgument, "snapshot times must lie in (0, T]");

  Trajectory tr;
  tr.cfg = cfg;
  const auto w = cfg.mass_weights();
  const double q = cfg.params.q;
  const double dt = cfg.time_step();
  std::map<double, Diffusion> factors;
  auto factor_for = [&](double d) -> const Diffusion& {
    auto it = factors.find(d);
    if (it == factors.end()) it = factors.emplace(d, Diffusion(cfg, g.size(), d)).first;
    return it->second;
  };

  std::vector<double> coord(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) coord[i] = std::abs(g.lo[0] + g.h * static_cast<double>(i));
  std::vector<double> u = u0.values;
  double t = 0.0;
  auto exterior = [&](double time) {
    if (!cfg.parabolic_radius) return 0.0;
    const double rho2 = *cfg.parabolic_radius * *cfg.parabolic_radius;
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (coord[i] * coord[i] + time > rho2) s += w[i] * ipow(u[i], q);
    return s;
  };
  tr.history.push_back({0.0, weighted_sum(w, u, 1.0), weighted_sum(w, u, q), exterior(0.0)});
  std::size_t next = 0;
  const bool check_bound = cfg.absorption != Absorption::Off;
  while (t < cfg.T * (1.0 - 1e-14)) {
    double target = next < stops.size() ? stops[next] : cfg.T;
    double d = std::min(dt, target - t);
    if (target - t - dt < 1e-9 * dt) d = target - t;
    absorb(u, cfg, 0.5 * d);
    factor_for(d).solve(u);
    absorb(u, cfg, 0.5 * d);
    t = (std::abs(t + d - target) <= 1e-12 * std::max(1.0, target)) ? target : t + d;
    if (check_bound) {
      const double bound = cfg.params.universal_bound(t) * (1.0 + 1e-6);
      for (double v : u)
        if (v > bound)
          throw Error(ErrorCode::MaximumPrincipleViolated,
                      "u exceeds ((q-1)t)^{-1/(q-1)} at t=" + std::to_string(t));
    }
    tr.history.push_back({t, weighted_sum(w, u, 1.0), weighted_sum(w, u, q), exterior(t)});
    while (next < stops.size() && stops[next] <= t * (1.0 + 1e-12)) {
      GridFunction snap(g, u, t);
      snap.nonnegative = true;
      tr.snapshots.push_back(std::move(snap));
      ++next;
    }
  }
  return tr;
}

Trajectory solve_cauchy(const RadonMeasure& mu, const SolverConfig& cfg, const std::vector<double>& times) {
  return solve_cauchy(discretize(mu, cfg), cfg, times);
}

double probe(const GridFunction& u, const SolverConfig& cfg, const Point& x) {
  return interpolate(u, {cfg.coordinate(x)});
}

std::vector<ProbeRow> probe_table(const Trajectory& tr, const std::vector<Point>& xs) {
  std::vector<ProbeRow> rows;
  for (const auto& snap : tr.snapshots) {
    for (const auto& x : xs) {
      ProbeRow r;
      r.x = x;
      r.t = *snap.time;
      r.u = probe(snap, tr.cfg, x);
      r.bound = tr.cfg.params.universal_bound(r.t);
      r.slack = r.bound - r.u;
      rows.push_back(r);
    }
  }
  return rows;
}

void write_probe_csv(std::ostream& os, const std::vector<ProbeRow>& rows) {
  os << "x,t,u,bound,slack\n";
  os.precision(12);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.x.size(); ++i) os << (i ? ";" : "") << r.x[i];
    os << ',' << r.t << ',' << r.u << ',' << r.bound << ',' << r.slack << '\n';
  }
}

void write_snapshot_csv(std::ostream& os, const GridFunction& u, const SolverConfig& cfg) {
  os.precision(12);
  os << "# t=" << u.time.value_or(0.0) << " h=" << u.grid.h << " lo=" << u.grid.lo[0]
     << " geometry=" << (cfg.geometry == Geometry::Line ? "line" : "radial") << " N=" << cfg.params.N << '\n';
  os << "x,u\n";
  for (std::size_t i = 0; i < u.values.size(); ++i) os << u.grid.node(i)[0] << ',' << u.values[i] << '\n';
}

// ---------------------------------------------------------------------------
// Maximal and σ-moderate solutions

GridFunction neighbourhood_indicator(const ClosedSet& F, double eps, const SolverConfig& cfg) {
  require(eps >= 0.0, ErrorCode::InvalidArgument, "eps must be >= 0");
  auto g = cfg.grid();
  GridFunction chi(g, 0.0);
  chi.time = 0.0;
  if (F.is_empty()) return chi;
  const int dim = cfg.geometry == Geometry::Line ? 1 : cfg.params.N;
  require(F.dim() == dim, ErrorCode::InvalidArgument, "set dimension does not match the solver");
  const double tol = 1e-12 * (g.h * g.n[0]);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point x(dim, 0.0);
    x[0] = g.lo[0] + g.h * static_cast<double>(i);
    double d = F.dist(x);
    if (d <= eps + tol) {
      chi.values[i] = 1.0;
      any = true;
    }
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  if (!any) chi.values[best_i] = 1.0;
  return chi;
}

std::vector<double> MaximalResult::trace(const SolverConfig& cfg, const Point& x, std::size_t time_index) const {
  std::vector<double> out;
  for (const auto& lvl : levels) out.push_back(probe(lvl.fields.at(time_index), cfg, x));
  return out;
}

MaximalResult maximal_solution(const ClosedSet& F, const SolverConfig& cfg, const std::vector<double>& times,
                               const MaximalOptions& options) {
  require(F.bounded() && !F.is_full_space(), ErrorCode::UnboundedSet, "maximal solution needs a bounded set");
  require(!options.k_list.empty() && !options.eps_list.empty(), ErrorCode::InvalidArgument, "need k and eps lists");
  for (std::size_t i = 1; i < options.k_list.size(); ++i)
    require(options.k_list[i] > options.k_list[i - 1], ErrorCode::InvalidArgument, "k_list must increase");
  for (std::size_t i = 1; i < options.eps_list.size(); ++i)
    require(options.eps_list[i] < options.eps_list[i - 1], ErrorCode::InvalidArgument, "eps_list must decrease");
  MaximalResult res;
  res.times = times;
  std::sort(res.times.begin(), res.times.end());
  for (double eps : options.eps_list) {
    MaximalLevel lvl;
    lvl.eps = eps;
    GridFunction chi = neighbourhood_indicator(F, eps, cfg);
    std::vector<GridFunction> prev;
    for (double k : options.k_list) {
      GridFunction u0 = chi;
      for (double& v : u0.values) v *= k;
      auto tr = solve_cauchy(u0, cfg, res.times);
      lvl.k_used = k;
      if (!prev.empty()) {
        double diff = 0.0, umax = 0.0;
        for (std::size_t j = 0; j < prev.size(); ++j) {
          for (std::size_t i = 0; i < prev[j].values.size(); ++i) {
            double a = prev[j].values[i], b = tr.snapshots[j].values[i];
            umax = std::max(umax, b);
            if (b < a - options.slack * std::max(1.0, a))
              throw Error(ErrorCode::MaximumPrincipleViolated, "u_k decreased as k increased");
            diff = std::max(diff, std::abs(b - a));
          }
        }
        prev = std::move(tr.snapshots);
        if (diff <= options.tol_k * umax) {
          lvl.k_converged = true;
          break;
        }
      } else {
        prev = std::move(tr.snapshots);
      }
    }
    lvl.fields = std::move(prev);
    if (!res.levels.empty()) {
      const auto& before = res.levels.back().fields;
      for (std::size_t j = 0; j < before.size(); ++j)
        for (std::size_t i = 0; i < before[j].values.size(); ++i)
          if (lvl.fields[j].values[i] > before[j].values[i] + options.slack * std::max(1.0, before[j].values[i]))
            res.monotone_in_eps = false;
    }
    res.levels.push_back(std::move(lvl));
  }
  return res;
}

SigmaModerateResult sigma_moderate_sup(const std::vector<RadonMeasure>& family, const SolverConfig& cfg,
                                       const std::vector<double>& times) {
  SigmaModerateResult res;
  res.times = times;
  std::sort(res.times.begin(), res.times.end());
  auto g = cfg.grid();
  for (double t : res.times) {
    GridFunction z(g, 0.0);
    z.time = t;
    res.fields.push_back(z);
  }
  for (const auto& mu : family) {
    auto tr = solve_cauchy(mu, cfg, res.times);
    for (std::size_t j = 0; j < res.fields.size(); ++j)
      for (std::size_t i = 0; i < res.fields[j].values.size(); ++i)
        res.fields[j].values[i] = std::max(res.fields[j].values[i], tr.snapshots[j].values[i]);
    res.partial.push_back(res.fields);
  }
  return res;
}

std::vector<RadonMeasure> capacitary_family(const ClosedSet& K, const ProblemParams& params,
                                            const std::vector<double>& lambdas, const CapacityOptions& options) {
  CapacityOptions opt = options;
  opt.refine_bracket = false;
  auto nu = capacitary_measure(CapacityProblem::make(K, params, opt));
  std::vector<RadonMeasure> family;
  for (double l : lambdas) family.push_back(nu.scaled(l));
  return family;
}

// ---------------------------------------------------------------------------
// Self-similar profiles

namespace {

struct Shot {
  bool crossed = false;
  std::vector<double> f, fp;
};

Shot shoot(double a, int dim, double q, double y_max, double dy, bool keep) {
  Shot s;
  const std::size_t n = static_cast<std::size_t>(std::llround(y_max / dy));
  auto rhs = [dim, q](double y, double f, double fp) {
    double fq = f > 0.0 ? std::pow(f, q) : -std::pow(-f, q);
    return -((dim - 1) / y + 0.5 * y) * fp - f / (q - 1.0) + fq;
  };
  const double c = (std::pow(a, q) - a / (q - 1.0)) / dim;
  double f = a, fp = 0.0;
  if (keep) {
    s.f.reserve(n + 1);
    s.fp.reserve(n + 1);
    s.f.push_back(a);
    s.fp.push_back(0.0);
  }
  // Series start at y = dy.
  double y = dy;
  f = a + 0.5 * c * dy * dy;
  fp = c * dy;
  if (keep) {
    s.f.push_back(f);
    s.fp.push_back(fp);
  }
  for (std::size_t i = 1; i < n; ++i) {
    double k1f = fp, k1p = rhs(y, f, fp);
    double k2f = fp + 0.5 * dy * k1p, k2p = rhs(y + 0.5 * dy, f + 0.5 * dy * k1f, fp + 0.5 * dy * k1p);
    double k3f = fp + 0.5 * dy * k2p, k3p = rhs(y + 0.5 * dy, f + 0.5 * dy * k2f, fp + 0.5 * dy * k2p);
    double k4f = fp + dy * k3p, k4p = rhs(y + dy, f + dy * k3f, fp + dy * k3p);
    f += dy / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f);
    fp += dy / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    y += dy;
    if (f <= 0.0) {
      s.crossed = true;
      return s;
    }
    if (keep) {
      s.f.push_back(f);
      s.fp.push_back(fp);
    }
  }
  return s;
}

}  // namespace

double Profile::value(double yy) const {
  yy = std::abs(yy);
  if (yy <= y_trust) {
    std::size_t i = std::min(static_cast<std::size_t>(yy / dy), y.size() - 2);
    double s = (yy - y[i]) / dy;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * f[i] + h10 * dy * fp[i] + h01 * f[i + 1] + h11 * dy * fp[i + 1];
  }
  const double beta = 2.0 / (params.q - 1.0) - dim;
  return tail_constant * std::pow(yy, beta) * std::exp(-0.25 * yy * yy);
}

Profile very_singular_profile(const ProblemParams& params, ProfileKind kind, const ProfileOptions& options) {
  const double q = params.q;
  const int dim = kind == ProfileKind::HalfLine ? 1 : params.N;
  if (kind == ProfileKind::RadialVSS)
    require(q > 1.0 && q < params.qc, ErrorCode::NoProfileRegime, "radial profile needs 1 < q < q_c");
  else
    require(q > 1.0 && q < 3.0, ErrorCode::NoProfileRegime, "half-line profile needs 1 < q < 3");
  require(options.dy > 0.0 && options.y_max > 10 * options.dy, ErrorCode::InvalidArgument, "bad profile grid");

  const double flat = std::pow(q - 1.0, -1.0 / (q - 1.0));
  // Below the profile value the trajectory oscillates through zero; above it
  // the solution stays positive and decays only like y^{-2/(q-1)}.
  auto crosses = [&](double a) { return shoot(a, dim, q, options.y_max, options.dy, false).crossed; };
  double lo = 1e-6 * flat;
  if (!crosses(lo)) throw Error(ErrorCode::ShootingFailed, "small initial value does not cross zero");
  double hi = -1.0;
  for (double frac : {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.999}) {
    if (!crosses(frac * flat)) {
      hi = frac * flat;
      break;
    }
    lo = frac * flat;
  }
  if (hi < 0.0) throw Error(ErrorCode::ShootingFailed, "every trial value crosses zero");
  for (int it = 0; it < 200 && hi - lo > 2e-16 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (crosses(mid) ? lo : hi) = mid;
  }
  Shot best = shoot(hi, dim, q, options.y_max, options.dy, true);
  Profile p;
  p.kind = kind;
  p.params = params;
  p.dim = dim;
  p.dy = options.dy;
  p.f = std::move(best.f);
  p.fp = std::move(best.fp);
  p.y.resize(p.f.size());
  for (std::size_t i = 0; i < p.y.size(); ++i) p.y[i] = options.dy * static_cast<double>(i);
  const double ymax = p.y.back();
  const double window = std::pow(ymax, 2.0 / (q - 1.0)) * p.f.back();
  if (!(window < options.window))
    throw Error(ErrorCode::ShootingFailed, "decay window not reached: |y|^{2/(q-1)} f = " + std::to_string(window));
  const double beta = 2.0 / (q - 1.0) - dim;
  p.y_trust = 0.8 * ymax;
  p.tail_constant = p.value(p.y_trust) / (std::pow(p.y_trust, beta) * std::exp(-0.25 * p.y_trust * p.y_trust));
  return p;
}

// ---------------------------------------------------------------------------
// Comparisons with potentials and profiles

void SandwichReport::write_csv(std::ostream& os) const {
  os << "x,t,u,W,ratio,anomaly\n";
  os.precision(12);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.x.size(); ++i) os << (i ? ";" : "") << r.x[i];
    os << ',' << r.t << ',' << r.u << ',' << r.W << ',' << r.ratio << ',' << (r.anomaly ? 1 : 0) << '\n';
  }
}

SandwichReport bilateral_check(const ClosedSet& F, const SolverConfig& cfg, CapacityBackend& cap,
                               const std::vector<Point>& xs, const std::vector<double>& ts,
                               const MaximalOptions& options, double anomaly_tol) {
  require(cfg.params.supercritical, ErrorCode::InvalidArgument, "bilateral check needs q >= q_c");
  auto res = maximal_solution(F, cfg, ts, options);
  SandwichReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.finite_positive = true;
  for (std::size_t j = 0; j < res.times.size(); ++j) {
    const double t = res.times[j];
    for (const auto& x : xs) {
      SandwichRow row;
      row.x = x;
      row.t = t;
      row.u = probe(res.final_fields()[j], cfg, x);
      row.W = W_series(F, x, t, cfg.params, cap);
      if (row.W > 0.0) {
        row.ratio = row.u / row.W;
        if (!(row.ratio > 0.0 && std::isfinite(row.ratio))) rep.finite_positive = false;
        rep.min_ratio = std::min(rep.min_ratio, row.ratio);
        rep.max_ratio = std::max(rep.max_ratio, row.ratio);
      } else if (row.u > anomaly_tol * std::pow(t, -1.0 / (cfg.params.q - 1.0))) {
        row.anomaly = true;
        ++rep.anomalies;
      }
      rep.rows.push_back(row);
    }
  }
  if (!std::isfinite(rep.min_ratio)) {
    rep.min_ratio = 0.0;
    rep.finite_positive = false;
  }
  return rep;
}

SubcriticalReport subcritical_bounds_check(const SolverConfig& cfg, double t_check, double y_window,
                                           const std::vector<Point>& xs, const std::vector<double>& ts,
                                           const MaximalOptions& options) {
  const auto& P = cfg.params;
  require(P.q > 1.0 && P.q < P.qc, ErrorCode::NoProfileRegime, "subcritical check needs 1 < q < q_c");
  SubcriticalReport rep;
  rep.profile = very_singular_profile(P, ProfileKind::RadialVSS);
  std::vector<double> times = ts;
  times.push_back(t_check);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const int dim = cfg.geometry == Geometry::Line ? 1 : P.N;
  auto res = maximal_solution(ClosedSet::point(Point(dim, 0.0)), cfg, times, options);
  const double e = 1.0 / (P.q - 1.0);

  auto idx_of = [&](double t) {
    return static_cast<std::size_t>(std::find(res.times.begin(), res.times.end(), t) - res.times.begin());
  };
  {
    const auto& u = res.final_fields()[idx_of(t_check)];
    const double st = std::sqrt(t_check);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      double r = std::abs(u.grid.node(i)[0]);
      if (r > y_window * st) continue;
      rep.sup_gap = std::max(rep.sup_gap, std::abs(std::pow(t_check, e) * u.values[i] - rep.profile.value(r / st)));
    }
  }
  rep.lower_min_ratio = std::numeric_limits<double>::infinity();
  double up_min = std::numeric_limits<double>::infinity(), up_max = 0.0;
  for (double t : ts) {
    const auto& u = res.final_fields()[idx_of(t)];
    for (const auto& x : xs) {
      double val = probe(u, cfg, x);
      double r = cfg.coordinate(x);
      r = std::abs(r);
      double y = r / std::sqrt(t);
      double lower = std::pow(t, -e) * rep.profile.value(y);
      if (lower > 1e-12 * std::pow(t, -e)) rep.lower_min_ratio = std::min(rep.lower_min_ratio, val / lower);
      double env = std::pow(t, -e) * std::min(1.0, y > 0.0 ? std::pow(y, 2.0 * e - dim) * std::exp(-0.25 * y * y) : 1.0);
      if (env > 1e-12 * std::pow(t, -e) && val > 0.0) {
        up_min = std::min(up_min, val / env);
        up_max = std::max(up_max, val / env);
      }
      ProbeRow row;
      row.x = x;
      row.t = t;
      row.u = val;
      row.bound = P.universal_bound(t);
      row.slack = row.bound - val;
      rep.probes.push_back(row);
    }
  }
  rep.lower_bound_holds = rep.lower_min_ratio >= 0.95;
  rep.up1_constant = up_max;
  rep.up1_spread = up_min > 0.0 && std::isfinite(up_min) ? up_max / up_min : 0.0;
  return rep;
}

HalfLineBoundReport halfline_upper_check(double r, const SolverConfig& cfg, const std::vector<Point>& xs,
                                         const std::vector<double>& ts, const MaximalOptions& options) {
  const auto& P = cfg.params;
  require(P.N == 1 && P.q > 1.0 && P.q < 3.0, ErrorCode::NoProfileRegime, "half-line bound needs N = 1, 1 < q < 3");
  auto f1 = very_singular_profile(P, ProfileKind::HalfLine);
  auto res = maximal_solution(ClosedSet::interval(-r, r), cfg, ts, options);
  HalfLineBoundReport rep;
  const double e = 1.0 / (P.q - 1.0);
  for (std::size_t j = 0; j < res.times.size(); ++j) {
    const double t = res.times[j];
    for (const auto& x : xs) {
      double ax = std::abs(cfg.coordinate(x));
      if (ax < r) continue;
      const double fy = f1.value((ax - r) / std::sqrt(t));
      // Below this level the comparison is between discretization floors.
      if (!(fy > 1e-8)) continue;
      const double bound = std::pow(t, -e) * fy;
      double ratio = probe(res.final_fields()[j], cfg, x) / bound;
      if (ratio > rep.max_ratio) {
        rep.max_ratio = ratio;
        rep.argmax = x;
        rep.t_argmax = t;
      }
    }
  }
  rep.holds = rep.max_ratio <= 1.05;
  return rep;
}

}  // namespace parcap
