#include "parcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "parcap/error.hpp"
#include "parcap/spectral.hpp"

namespace parcap {

std::string to_string(CapacityMethod m) {
  switch (m) {
    case CapacityMethod::ClosedFormScaling: return "ClosedFormScaling";
    case CapacityMethod::VariationalNumeric: return "VariationalNumeric";
    case CapacityMethod::MonotoneBound: return "MonotoneBound";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Problem setup

CapacityProblem CapacityProblem::make(const ClosedSet& K, const ProblemParams& params, const CapacityOptions& options) {
  require(!K.is_full_space() && K.bounded(), ErrorCode::UnboundedSet, "capacity needs a compact set");
  CapacityProblem prob;
  prob.params = params;
  prob.K = K;
  prob.options = options;
  prob.s = params.order();
  prob.p = params.integrability();
  const int N = K.dim();

  double h = options.h;
  if (h <= 0.0) {
    double feat = K.min_feature();
    h = options.h_default;
    if (std::isfinite(feat)) h = std::min(h, std::max(options.h_min, feat / 4.0));
  }

  Point lo(N, -1.0), hi(N, 1.0);
  if (auto bb = K.bbox()) {
    lo = bb->lo;
    hi = bb->hi;
  }
  if (options.zero_outside_radius) {
    require(static_cast<int>(options.zero_center.size()) == N, ErrorCode::InvalidArgument,
            "zero-boundary center has wrong dimension");
    for (int a = 0; a < N; ++a) {
      lo[a] = std::min(lo[a], options.zero_center[a] - *options.zero_outside_radius);
      hi[a] = std::max(hi[a], options.zero_center[a] + *options.zero_outside_radius);
    }
  }
  double diam = BoundingBox{lo, hi}.diameter();
  double margin = options.margin > 0.0 ? options.margin : std::max(diam, 6.0);
  margin = std::ceil(margin / h - 1e-9) * h;

  UniformGrid g;
  g.h = h;
  g.lo = lo;
  for (int a = 0; a < N; ++a) {
    g.lo[a] -= margin;
    double extent = hi[a] + margin - g.lo[a];
    g.n.push_back(static_cast<int>(std::ceil(extent / h - 1e-9)) + 1);
  }
  prob.grid = g;
  return prob;
}

CapacityProblem CapacityProblem::with_spacing(double h) const {
  require(h > 0.0, ErrorCode::InvalidArgument, "spacing must be positive");
  CapacityProblem out = *this;
  const double ratio = grid.h / h;
  out.grid.h = h;
  for (auto& n : out.grid.n) n = static_cast<int>(std::ceil((n - 1) * ratio - 1e-9)) + 1;
  out.options.h = h;
  return out;
}

namespace {

double geo_tol(const UniformGrid& g) {
  Point hi = g.hi();
  return 1e-12 * BoundingBox{g.lo, hi}.diameter() + 1e-12 * g.h;
}

std::vector<std::size_t> zero_nodes(const CapacityProblem& prob, const std::vector<std::size_t>& knodes) {
  std::vector<std::size_t> out;
  if (!prob.options.zero_outside_radius) return out;
  const double R = *prob.options.zero_outside_radius;
  const double tol = geo_tol(prob.grid);
  for (std::size_t f = 0; f < prob.grid.size(); ++f)
    if (distance(prob.grid.node(f), prob.options.zero_center) > R + tol) out.push_back(f);
  std::vector<std::size_t> clash;
  std::set_intersection(out.begin(), out.end(), knodes.begin(), knodes.end(), std::back_inserter(clash));
  require(clash.empty(), ErrorCode::InvalidArgument, "K must lie inside the zero-boundary ball");
  return out;
}

double signed_pow(double v, double e) { return v >= 0.0 ? std::pow(v, e) : -std::pow(-v, e); }

// Evaluates the dual objective D(ν) = p Σ_K ν - (p-1) h^N Σ |φ|^q with
// φ = Gν / h^N, and the primal candidate η = G(|φ|^{q-2} φ).
struct DualModel {
  const CapacityProblem& prob;
  std::unique_ptr<FourierMultiplier> G;
  std::unique_ptr<FourierMultiplier> L;
  std::vector<double> kernel_sq;
  std::vector<std::size_t> vars;  // K nodes first, then zero-boundary nodes
  std::size_t nK = 0;
  double hN = 1.0, q = 2.0, p = 2.0;

  explicit DualModel(const CapacityProblem& pr) : prob(pr) {
    G = bessel_potential_operator(pr.grid, pr.s);
    L = bessel_derivative_operator(pr.grid, pr.s);
    auto k = G->kernel();
    kernel_sq.resize(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) kernel_sq[i] = k[i] * k[i];
    hN = pr.grid.cell_volume();
    q = pr.params.q;
    p = pr.p;
  }

  struct Eval {
    double D = 0.0;
    std::vector<double> phi, weight, eta, grad;
  };

  std::vector<double> scatter(const std::vector<double>& v) const {
    std::vector<double> full(prob.grid.size(), 0.0);
    for (std::size_t i = 0; i < vars.size(); ++i) full[vars[i]] = v[i];
    return full;
  }

  Eval evaluate(const std::vector<double>& nu) const {
    Eval e;
    G->apply(scatter(nu), e.phi);
    double sumq = 0.0;
    std::vector<double> psi(e.phi.size());
    e.weight.resize(e.phi.size());
    for (std::size_t i = 0; i < e.phi.size(); ++i) {
      e.phi[i] /= hN;
      double a = std::abs(e.phi[i]);
      sumq += std::pow(a, q);
      psi[i] = signed_pow(e.phi[i], q - 1.0);
      e.weight[i] = (q - 1.0) * std::pow(std::max(a, 1e-300), q - 2.0);
    }
    G->apply(psi, e.eta);
    double mass = 0.0;
    for (std::size_t i = 0; i < nK; ++i) mass += nu[i];
    e.D = p * mass - (p - 1.0) * hN * sumq;
    e.grad.resize(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i)
      e.grad[i] = i < nK ? p * (1.0 - e.eta[vars[i]]) : -p * e.eta[vars[i]];
    return e;
  }

  // A d = p [G(w ⊙ G d)]_vars / h^N, the negated Hessian.
  std::vector<double> hess(const Eval& e, const std::vector<double>& d) const {
    std::vector<double> tmp, out;
    G->apply(scatter(d), tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] *= e.weight[i];
    G->apply(tmp, out);
    std::vector<double> r(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) r[i] = p * out[vars[i]] / hN;
    return r;
  }

  std::vector<double> hess_diag(const Eval& e) const {
    std::vector<double> c;
    G->convolve(kernel_sq, e.weight, c);
    std::vector<double> d(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) d[i] = std::max(p * c[vars[i]] / hN, 1e-300);
    return d;
  }

  // Feasible primal cost of η scaled to >= 1 on K with zeros forced on the boundary nodes.
  double upper_bound(const Eval& e) const {
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nK; ++i) mn = std::min(mn, e.eta[vars[i]]);
    if (!(mn > 0.0)) return std::numeric_limits<double>::infinity();
    if (vars.size() == nK) {
      double sumq = 0.0;
      for (double v : e.phi) sumq += std::pow(std::abs(v), q);
      return hN * sumq / std::pow(mn, p);
    }
    std::vector<double> eta = e.eta, lv;
    for (std::size_t i = nK; i < vars.size(); ++i) eta[vars[i]] = 0.0;
    L->apply(eta, lv);
    double sum = 0.0;
    for (double v : lv) sum += std::pow(std::abs(v), p);
    return hN * sum / std::pow(mn, p);
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dual projected Newton-CG

DiscreteCapacity solve_capacity_dual(const CapacityProblem& prob) {
  DiscreteCapacity out;
  const double tol = geo_tol(prob.grid);
  out.nodes = mark_nodes(prob.grid, prob.K, tol);
  if (out.nodes.empty()) {
    out.eta.assign(prob.grid.size(), 0.0);
    return out;
  }
  DualModel model(prob);
  model.vars = out.nodes;
  model.nK = out.nodes.size();
  auto zn = zero_nodes(prob, out.nodes);
  model.vars.insert(model.vars.end(), zn.begin(), zn.end());
  const std::size_t nv = model.vars.size();
  const std::size_t nK = model.nK;

  // Best uniform multiplier on K: c^{q-1} = m / A with A = h^N Σ (G 1_K / h^N)^q.
  std::vector<double> nu(nv, 0.0);
  {
    std::vector<double> ones(nv, 0.0);
    std::fill(ones.begin(), ones.begin() + nK, 1.0);
    auto e = model.evaluate(ones);
    double sumq = 0.0;
    for (double v : e.phi) sumq += std::pow(std::abs(v), model.q);
    double c = std::pow(static_cast<double>(nK) / (model.hN * sumq), 1.0 / (model.q - 1.0));
    for (std::size_t i = 0; i < nK; ++i) nu[i] = c;
  }

  auto e = model.evaluate(nu);
  double lower = e.D;
  double upper = model.upper_bound(e);
  int it = 0;
  for (; it < prob.options.max_newton; ++it) {
    if (upper - lower <= prob.options.gap_tol * std::abs(upper)) break;

    double numax = 0.0;
    for (std::size_t i = 0; i < nK; ++i) numax = std::max(numax, nu[i]);
    const double eps_act = 1e-10 * numax;
    std::vector<char> fixed(nv, 0);
    for (std::size_t i = 0; i < nK; ++i) fixed[i] = (nu[i] <= eps_act && e.grad[i] < 0.0);

    auto diag = model.hess_diag(e);
    // Preconditioned CG on the free block of A d = g.
    std::vector<double> d(nv, 0.0), r(nv, 0.0), z(nv, 0.0), pdir(nv, 0.0);
    for (std::size_t i = 0; i < nv; ++i) r[i] = fixed[i] ? 0.0 : e.grad[i];
    for (std::size_t i = 0; i < nv; ++i) z[i] = r[i] / diag[i];
    pdir = z;
    double rz = dot(r, z);
    const double rnorm0 = std::sqrt(dot(r, r));
    const int cg_max = static_cast<int>(std::min<std::size_t>(nv, 500));
    for (int k = 0; k < cg_max && rnorm0 > 0.0; ++k) {
      auto Ap = model.hess(e, pdir);
      for (std::size_t i = 0; i < nv; ++i)
        if (fixed[i]) Ap[i] = 0.0;
      double pAp = dot(pdir, Ap);
      if (!(pAp > 0.0)) break;
      double alpha = rz / pAp;
      for (std::size_t i = 0; i < nv; ++i) {
        d[i] += alpha * pdir[i];
        r[i] -= alpha * Ap[i];
      }
      if (std::sqrt(dot(r, r)) <= 1e-6 * rnorm0) break;
      for (std::size_t i = 0; i < nv; ++i) z[i] = fixed[i] ? 0.0 : r[i] / diag[i];
      double rz_new = dot(r, z);
      double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < nv; ++i) pdir[i] = z[i] + beta * pdir[i];
    }
    for (std::size_t i = 0; i < nv; ++i)
      if (fixed[i]) d[i] = e.grad[i] / diag[i];

    auto try_direction = [&](const std::vector<double>& dir) -> bool {
      for (double alpha = 1.0; alpha >= 1e-12; alpha *= 0.5) {
        std::vector<double> trial(nv);
        for (std::size_t i = 0; i < nv; ++i) {
          trial[i] = nu[i] + alpha * dir[i];
          if (i < nK) trial[i] = std::max(0.0, trial[i]);
        }
        double gstep = 0.0;
        for (std::size_t i = 0; i < nv; ++i) gstep += e.grad[i] * (trial[i] - nu[i]);
        if (!(gstep > 0.0)) continue;
        auto et = model.evaluate(trial);
        if (et.D >= e.D + 1e-4 * gstep) {
          nu = std::move(trial);
          e = std::move(et);
          return true;
        }
      }
      return false;
    };

    if (!try_direction(d)) {
      std::vector<double> gdir(nv);
      for (std::size_t i = 0; i < nv; ++i) gdir[i] = e.grad[i] / diag[i];
      if (!try_direction(gdir)) break;
    }
    lower = std::max(lower, e.D);
    upper = std::min(upper, model.upper_bound(e));
  }
  out.iterations = it;
  out.lower = lower;
  out.upper = upper;
  out.value = lower;
  out.nu.assign(nu.begin(), nu.begin() + static_cast<std::ptrdiff_t>(nK));
  out.eta = e.eta;
  if (!(upper - lower <= prob.options.gap_tol * std::abs(upper) * 10.0))
    throw OptimizerStalledError("dual Newton stopped with relative gap " + std::to_string((upper - lower) / upper),
                                upper);
  return out;
}

// ---------------------------------------------------------------------------
// Primal projected gradient

DiscreteCapacity solve_capacity_primal(const CapacityProblem& prob) {
  DiscreteCapacity out;
  const double tol = geo_tol(prob.grid);
  out.nodes = mark_nodes(prob.grid, prob.K, tol);
  const std::size_t n = prob.grid.size();
  if (out.nodes.empty()) {
    out.eta.assign(n, 0.0);
    return out;
  }
  auto zn = zero_nodes(prob, out.nodes);
  auto L = bessel_derivative_operator(prob.grid, prob.s);
  const double hN = prob.grid.cell_volume();
  const double p = prob.p;

  auto project = [&](std::vector<double>& eta) {
    for (auto k : out.nodes) eta[k] = std::max(eta[k], 1.0);
    for (auto k : zn) eta[k] = 0.0;
  };
  auto objective = [&](const std::vector<double>& eta, std::vector<double>* grad) {
    std::vector<double> v;
    L->apply(eta, v);
    double sum = 0.0;
    for (double& x : v) {
      sum += std::pow(std::abs(x), p);
      x = signed_pow(x, p - 1.0);
    }
    if (grad) {
      L->apply(v, *grad);
      for (double& g : *grad) g *= p * hN;
    }
    return hN * sum;
  };

  // Start from a smooth bump equal to 1 on K.
  std::vector<double> eta(n, 0.0);
  {
    auto G = bessel_potential_operator(prob.grid, 2.0);
    std::vector<double> ind(n, 0.0), sm;
    for (auto k : out.nodes) ind[k] = 1.0;
    G->apply(ind, sm);
    double mn = std::numeric_limits<double>::infinity();
    for (auto k : out.nodes) mn = std::min(mn, sm[k]);
    for (std::size_t i = 0; i < n; ++i) eta[i] = std::max(0.0, sm[i] / mn);
    project(eta);
  }

  std::vector<double> grad;
  double f = objective(eta, &grad);
  std::vector<double> history{f};
  double lambda = 1.0 / std::max(1e-300, std::sqrt(dot(grad, grad)));
  const int window = 20;
  int it = 0;
  bool converged = false;
  for (; it < prob.options.max_primal; ++it) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = eta[i] - lambda * grad[i];
    project(d);
    for (std::size_t i = 0; i < n; ++i) d[i] -= eta[i];
    double gd = dot(grad, d);
    if (gd >= 0.0) {
      converged = true;
      break;
    }
    double fmax = *std::max_element(history.end() - std::min<std::ptrdiff_t>(10, history.size()), history.end());
    double alpha = 1.0;
    std::vector<double> trial(n), gtrial;
    double ft = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = eta[i] + alpha * d[i];
      ft = objective(trial, &gtrial);
      if (ft <= fmax + 1e-4 * alpha * gd || alpha < 1e-14) break;
      alpha *= 0.5;
    }
    double sy = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double si = trial[i] - eta[i];
      sy += si * (gtrial[i] - grad[i]);
      ss += si * si;
    }
    lambda = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : lambda * 2.0;
    eta.swap(trial);
    grad.swap(gtrial);
    f = ft;
    history.push_back(f);
    if (static_cast<int>(history.size()) > window) {
      double old = history[history.size() - 1 - window];
      if (std::abs(old - f) <= prob.options.primal_tol * window * std::abs(f)) {
        converged = true;
        break;
      }
    }
  }
  out.iterations = it;
  out.eta = eta;
  out.nu.resize(out.nodes.size());
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    auto k = out.nodes[i];
    out.nu[i] = eta[k] <= 1.0 + 1e-9 ? std::max(0.0, grad[k] / p) : 0.0;
  }
  out.upper = f;
  out.value = f;
  // Dual objective of the extracted multipliers is a certified lower bound.
  if (zn.empty()) {
    DualModel model(prob);
    model.vars = out.nodes;
    model.nK = out.nodes.size();
    out.lower = std::max(0.0, std::min(f, model.evaluate(out.nu).D));
  } else {
    out.lower = 0.0;
  }
  if (!converged) throw OptimizerStalledError("projected gradient hit max_iter", f);
  return out;
}

DiscreteCapacity solve_capacity(const CapacityProblem& prob) {
  return prob.options.solver == CapacitySolver::DualNewton ? solve_capacity_dual(prob) : solve_capacity_primal(prob);
}

CapacityEstimate capacity_numeric(const CapacityProblem& prob) {
  CapacityEstimate est;
  est.method = CapacityMethod::VariationalNumeric;
  est.h = prob.grid.h;
  if (prob.K.is_empty()) return est;
  auto r = solve_capacity(prob);
  est.value = r.value;
  est.bracket_lo = std::min(r.lower, r.value);
  est.bracket_hi = std::max(r.upper, r.value);
  est.iterations = r.iterations;
  if (prob.options.refine_bracket) {
    auto fine = solve_capacity(prob.with_spacing(0.5 * prob.grid.h));
    est.bracket_lo = std::min({est.bracket_lo, fine.lower, fine.value});
    est.bracket_hi = std::max({est.bracket_hi, fine.upper, fine.value});
    est.iterations += fine.iterations;
  }
  return est;
}

RadonMeasure capacitary_measure(const CapacityProblem& prob) {
  RadonMeasure m;
  if (prob.K.is_empty()) return m;
  auto r = solve_capacity(prob);
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    if (r.nu[i] > 0.0) m.atoms.push_back({prob.grid.node(r.nodes[i]), r.nu[i]});
  return m;
}

// ---------------------------------------------------------------------------
// Calibration cache and closed forms

CalibrationCache& CalibrationCache::global() {
  static CalibrationCache cache([]() -> std::optional<std::string> {
    const char* env = std::getenv("PARCAP_CACHE");
    if (env && *env) return std::string(env);
    return std::nullopt;
  }());
  return cache;
}

CalibrationCache::CalibrationCache(std::optional<std::string> path) : path_(std::move(path)) { load(); }

std::string CalibrationCache::key(const ProblemParams& params) {
  std::ostringstream os;
  os.precision(12);
  os << params.N << ',' << params.q;
  return os.str();
}

void CalibrationCache::load() {
  if (!path_) return;
  std::ifstream in(*path_);
  if (!in) return;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::SchemaMismatch, "calibration cache is not valid JSON: " + *path_);
  }
  require(j.is_object(), ErrorCode::SchemaMismatch, "calibration cache must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    require(it.value().is_number(), ErrorCode::SchemaMismatch, "calibration cache values must be numbers");
    values_[it.key()] = it.value().get<double>();
  }
}

void CalibrationCache::save() const {
  if (!path_) return;
  nlohmann::json j = nlohmann::json::object();
  std::vector<std::string> keys;
  for (const auto& kv : values_) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  for (const auto& k : keys) j[k] = values_.at(k);
  std::ofstream out(*path_);
  out << j.dump(2) << '\n';
}

std::optional<double> CalibrationCache::lookup(const ProblemParams& params) const {
  std::shared_lock lock(mu_);
  auto it = values_.find(key(params));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void CalibrationCache::store(const ProblemParams& params, double value) {
  std::unique_lock lock(mu_);
  values_[key(params)] = value;
  save();
}

void CalibrationCache::clear() {
  std::unique_lock lock(mu_);
  values_.clear();
}

double CalibrationCache::c_ball(const ProblemParams& params, const CapacityOptions& options) {
  if (auto v = lookup(params)) return *v;
  std::unique_lock lock(mu_);
  if (auto it = values_.find(key(params)); it != values_.end()) return it->second;
  CapacityOptions opt = options;
  opt.refine_bracket = false;
  if (opt.h <= 0.0) opt.h = params.N == 1 ? 0.01 : 0.05;
  if (params.N > 1 && opt.margin <= 0.0) opt.margin = 4.0;
  auto prob = CapacityProblem::make(ClosedSet::ball(Point(params.N, 0.0), 1.0), params, opt);
  double v = capacity_numeric(prob).value;
  values_[key(params)] = v;
  save();
  return v;
}

CapacityEstimate capacity_closed_form(const ClosedSet& K, const ProblemParams& params, CalibrationCache& cache) {
  require(params.supercritical, ErrorCode::NoClosedForm, "closed forms need q >= q_c");
  CapacityEstimate est;
  est.method = CapacityMethod::ClosedFormScaling;
  if (std::holds_alternative<ClosedSet::Singleton>(K.variant())) return est;
  if (const auto* b = std::get_if<ClosedSet::Ball>(&K.variant())) {
    require(static_cast<int>(b->center.size()) == params.N, ErrorCode::InvalidArgument, "ball dimension differs from N");
    if (b->radius == 0.0) return est;
    est.value = cache.c_ball(params) * std::pow(b->radius, params.capacity_scaling_exponent());
    est.bracket_lo = est.bracket_hi = est.value;
    return est;
  }
  throw Error(ErrorCode::NoClosedForm, "no closed form for " + K.kind());
}

// ---------------------------------------------------------------------------
// Derived quantities

namespace {

double piece_separation(const ClosedSet& a, const ClosedSet& b) {
  if (a.dim() == 1) {
    auto ia = a.intervals(), ib = b.intervals();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : *ia)
      for (const auto& y : *ib) best = std::min(best, std::max({0.0, y.lo - x.hi, x.lo - y.hi}));
    return best;
  }
  auto center_radius = [](const ClosedSet& s) -> std::optional<std::pair<Point, double>> {
    if (const auto* p = std::get_if<ClosedSet::Singleton>(&s.variant())) return std::make_pair(p->center, 0.0);
    if (const auto* b = std::get_if<ClosedSet::Ball>(&s.variant())) return std::make_pair(b->center, b->radius);
    return std::nullopt;
  };
  auto ca = center_radius(a), cb = center_radius(b);
  if (ca && cb) return std::max(0.0, distance(ca->first, cb->first) - ca->second - cb->second);
  auto ba = a.bbox(), bb = b.bbox();
  if (!ba || !bb) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t i = 0; i < ba->lo.size(); ++i) {
    double g = std::max({0.0, bb->lo[i] - ba->hi[i], ba->lo[i] - bb->hi[i]});
    s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace

double quasi_additivity_ratio(const std::vector<ClosedSet>& pieces, const ProblemParams& params,
                              const CapacityOptions& options) {
  require(!pieces.empty(), ErrorCode::InvalidArgument, "need at least one piece");
  if (pieces.size() == 1) return 1.0;
  for (std::size_t i = 0; i < pieces.size(); ++i)
    for (std::size_t j = i + 1; j < pieces.size(); ++j)
      if (!(piece_separation(pieces[i], pieces[j]) > 0.0))
        throw Error(ErrorCode::PiecesOverlap, "pieces " + std::to_string(i) + " and " + std::to_string(j) + " touch");
  ClosedSet U = ClosedSet::unite(pieces);
  auto uprob = CapacityProblem::make(U, params, options);
  CapacityOptions opt = options;
  opt.h = uprob.grid.h;
  opt.refine_bracket = false;
  uprob.options.refine_bracket = false;
  double cu = capacity_numeric(uprob).value;
  double sum = 0.0;
  for (const auto& g : pieces) sum += capacity_numeric(CapacityProblem::make(g, params, opt)).value;
  return sum / cu;
}

LocalGlobalCapacity local_vs_global_capacity(const ClosedSet& K, double r, double rho, const ProblemParams& params,
                                             const CapacityOptions& options) {
  require(params.supercritical, ErrorCode::InvalidArgument, "local vs global capacity needs q >= q_c");
  require(r > 0.0 && rho > 0.0, ErrorCode::InvalidArgument, "need r, rho > 0");
  Point origin(K.dim(), 0.0);
  if (!K.is_empty())
    require(K.diameter_from(origin) <= r * (1.0 + 1e-12), ErrorCode::InvalidArgument, "K must lie in B_r(0)");
  CapacityOptions loc = options;
  loc.refine_bracket = false;
  loc.zero_outside_radius = r + rho;
  loc.zero_center = origin;
  auto lp = CapacityProblem::make(K, params, loc);
  LocalGlobalCapacity out;
  out.local = capacity_numeric(lp).value;
  CapacityProblem gp = lp;
  gp.options.zero_outside_radius.reset();
  out.global = capacity_numeric(gp).value;
  return out;
}

// ---------------------------------------------------------------------------
// Backend

NumericCapacityBackend::NumericCapacityBackend(const ProblemParams& params, CapacityOptions options,
                                               bool closed_form_balls)
    : params_(params), options_(std::move(options)), closed_form_balls_(closed_form_balls) {}

double NumericCapacityBackend::capacity(const ClosedSet& K) {
  if (K.is_empty()) return 0.0;
  if (params_.supercritical && K.finite_point_set()) return 0.0;
  if (closed_form_balls_ && std::holds_alternative<ClosedSet::Ball>(K.variant()))
    return capacity_closed_form(K, params_).value;
  const std::string key = K.canonical_key();
  {
    std::shared_lock lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  double v = capacity_numeric(CapacityProblem::make(K, params_, options_)).value;
  std::unique_lock lock(mu_);
  cache_.emplace(key, v);
  ++solves_;
  return v;
}

std::size_t NumericCapacityBackend::cache_size() const {
  std::shared_lock lock(mu_);
  return cache_.size();
}

std::size_t NumericCapacityBackend::solves() const {
  std::shared_lock lock(mu_);
  return solves_;
}

}  // namespace parcap
