#include "parcap/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "parcap/error.hpp"
#include "parcap/quadrature.hpp"

namespace parcap {

namespace {

void check_inputs(const ClosedSet& F, const Point& x, double t) {
  require(t > 0.0 && std::isfinite(t), ErrorCode::NonpositiveTime, "time must be positive");
  require(!F.is_full_space() && F.bounded(), ErrorCode::UnboundedSet, "potentials need a bounded set");
  require(static_cast<int>(x.size()) == F.dim(), ErrorCode::InvalidArgument, "point has wrong dimension");
}

int compute_a_t(double D, double t) {
  double k = D * D / t;
  return std::max(0, static_cast<int>(std::ceil(k - 1e-9)) - 1);
}

// Radii at which the combinatorics of F ∩ B_s(x) change.
void collect_events(const ClosedSet& F, const Point& x, std::vector<double>& out) {
  if (auto ivs = F.intervals()) {
    for (const auto& iv : *ivs) {
      out.push_back(std::abs(x[0] - iv.lo));
      out.push_back(std::abs(x[0] - iv.hi));
      if (x[0] > iv.lo && x[0] < iv.hi) out.push_back(0.0);
    }
    return;
  }
  if (const auto* u = std::get_if<ClosedSet::Union>(&F.variant())) {
    for (const auto& m : u->members) collect_events(m, x, out);
    return;
  }
  if (F.is_empty()) return;
  out.push_back(F.dist(x));
  out.push_back(F.diameter_from(x));
}

// σ > sqrt(2e) with e ln σ - σ²/4 = peak - ln(1e16); the integrand is negligible beyond.
double gaussian_cut(double e) {
  const double drop = std::log(1e16);
  if (e <= 0.0) return 2.0 * std::sqrt(drop);
  auto f = [e](double s) { return e * std::log(s) - 0.25 * s * s; };
  double peak = std::sqrt(2.0 * e);
  double fp = f(peak);
  double lo = peak, hi = peak + 2.0 * std::sqrt(drop) + 1.0;
  while (fp - f(hi) < drop) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (fp - f(mid) < drop ? lo : hi) = mid;
  }
  return hi;
}

std::vector<double> panel_breaks(double s0, double s1, std::vector<double> events, int panels) {
  std::vector<double> inner;
  const double tol = 1e-9 * (s1 - s0);
  std::sort(events.begin(), events.end());
  for (double e : events)
    if (e > s0 + tol && e < s1 - tol && (inner.empty() || e - inner.back() > tol)) inner.push_back(e);
  if (static_cast<int>(inner.size()) > panels - 1) {
    std::vector<double> pick;
    for (int k = 0; k < panels - 1; ++k) {
      std::size_t i = (2 * static_cast<std::size_t>(k) + 1) * inner.size() / (2 * static_cast<std::size_t>(panels - 1));
      pick.push_back(inner[std::min(i, inner.size() - 1)]);
    }
    pick.erase(std::unique(pick.begin(), pick.end()), pick.end());
    inner = pick;
  }
  std::vector<double> br{s0};
  br.insert(br.end(), inner.begin(), inner.end());
  br.push_back(s1);
  while (static_cast<int>(br.size()) - 1 < panels) {
    std::size_t widest = 0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i)
      if (br[i + 1] - br[i] > br[widest + 1] - br[widest]) widest = i;
    br.insert(br.begin() + static_cast<std::ptrdiff_t>(widest) + 1, 0.5 * (br[widest] + br[widest + 1]));
  }
  return br;
}

}  // namespace

Slicing slice(const ClosedSet& F, const Point& x, double t) {
  check_inputs(F, x, t);
  Slicing out;
  out.x = x;
  out.t = t;
  if (F.is_empty()) return out;
  const double D = F.diameter_from(x);
  out.a_t = compute_a_t(D, t);
  const double dist = F.dist(x);
  const int n0 = std::min(out.a_t, static_cast<int>(std::floor(dist * dist / t)));
  for (int n = n0; n <= out.a_t; ++n) {
    double r0 = std::sqrt(n * t), r1 = std::sqrt((n + 1) * t);
    ClosedSet piece = F.clip_annulus(x, r0, r1);
    if (piece.is_empty()) continue;
    out.slices.push_back({n, std::move(piece), r1});
  }
  return out;
}

double W_series(const ClosedSet& F, const Point& x, double t, const ProblemParams& params, CapacityBackend& cap,
                const SeriesOptions& options) {
  check_inputs(F, x, t);
  require(params.N == F.dim(), ErrorCode::InvalidArgument, "set dimension differs from N");
  if (F.is_empty()) return 0.0;
  const double e = 0.5 * params.N - 1.0 / (params.q - 1.0);
  const double D = F.diameter_from(x);
  const int a_t = compute_a_t(D, t);
  const double dist = F.dist(x);
  const int n0 = std::min(a_t, static_cast<int>(std::floor(dist * dist / t)));
  const double geom_tail = 1.0 / (1.0 - std::exp(-0.25));
  double cball = -1.0;
  double sum = 0.0;
  for (int n = n0; n <= a_t; ++n) {
    const double weight = std::pow(n + 1.0, e) * std::exp(-0.25 * n);
    if (n >= 20) {
      if (cball < 0.0) cball = 2.0 * cap.capacity(ClosedSet::ball(Point(params.N, 0.0), 1.0));
      if (cball * weight * geom_tail <= options.truncation * sum) break;
      if (weight == 0.0) break;
    }
    const double r0 = std::sqrt(n * t), r1 = std::sqrt((n + 1) * t);
    ClosedSet piece = F.clip_annulus(x, r0, r1);
    if (piece.is_empty()) continue;
    sum += weight * cap.capacity(piece.affine(x, 1.0 / r1));
  }
  return std::pow(t, -1.0 / (params.q - 1.0)) * sum;
}

double scaled_ball_capacity(const ClosedSet& F, const Point& x, double s, CapacityBackend& cap) {
  if (!(s > 0.0)) return 0.0;
  ClosedSet piece = F.clip_ball(x, s);
  if (piece.is_empty()) return 0.0;
  return cap.capacity(piece.affine(x, 1.0 / s));
}

double integral_potential_segment(const ClosedSet& F, const Point& x, double t, double s0, double s1,
                                  const ProblemParams& params, CapacityBackend& cap, const IntegralOptions& options) {
  check_inputs(F, x, t);
  require(options.panels >= 1 && options.nodes_per_panel >= 1, ErrorCode::InvalidArgument, "need panels and nodes");
  if (F.is_empty() || !(s1 > s0)) return 0.0;
  const double a = params.N - 2.0 / (params.q - 1.0);
  std::vector<double> events;
  collect_events(F, x, events);
  auto br = panel_breaks(s0, s1, events, options.panels);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    for (const auto& [s, w] : gauss_legendre(options.nodes_per_panel, br[i], br[i + 1])) {
      double kern = std::pow(s, a + 1.0) * std::exp(-s * s / (4.0 * t));
      if (kern == 0.0) continue;
      acc += w * kern * scaled_ball_capacity(F, x, s, cap);
    }
  }
  return std::pow(t, -1.0 - 0.5 * params.N) * acc;
}

double W_integral(const ClosedSet& F, const Point& x, double t, const ProblemParams& params, CapacityBackend& cap,
                  const IntegralOptions& options) {
  check_inputs(F, x, t);
  require(params.N == F.dim(), ErrorCode::InvalidArgument, "set dimension differs from N");
  if (F.is_empty()) return 0.0;
  const double a = params.N - 2.0 / (params.q - 1.0);
  const double D = F.diameter_from(x);
  const double cut = gaussian_cut(a + 1.0) * std::sqrt(t);
  return integral_potential_segment(F, x, t, 0.0, std::min(D, cut), params, cap, options);
}

double tail_envelope(const ClosedSet& F, const Point& x, double t, const ProblemParams& params) {
  check_inputs(F, x, t);
  const double D = F.diameter_from(x);
  require(D > 0.0, ErrorCode::InvalidArgument, "tail envelope needs D_F(x) > 0");
  return std::pow(t, (params.q - 3.0) / (2.0 * (params.q - 1.0))) / D * std::exp(-D * D / (4.0 * t));
}

EquivalenceReport equivalence_report(const ClosedSet& F, const std::vector<Point>& xs, const std::vector<double>& ts,
                                     const ProblemParams& params, CapacityBackend& cap,
                                     const IntegralOptions& options) {
  EquivalenceReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;
  rep.all_finite_positive = true;
  IntegralOptions tail_opt = options;
  tail_opt.panels = 2;
  for (const auto& x : xs) {
    for (double t : ts) {
      EquivalenceRow row;
      row.x = x;
      row.t = t;
      row.w_series = W_series(F, x, t, params, cap);
      row.w_integral = W_integral(F, x, t, params, cap, options);
      row.ratio = row.w_series > 0.0 ? row.w_integral / row.w_series : 0.0;
      const double D = F.diameter_from(x);
      if (D > 0.0) {
        const int a_t = compute_a_t(D, t);
        row.tail_bound = tail_envelope(F, x, t, params);
        row.tail_lower = integral_potential_segment(F, x, t, std::sqrt(t * a_t), D, params, cap, tail_opt);
        row.tail_upper = integral_potential_segment(F, x, t, D, std::sqrt(t * (a_t + 2.0)), params, cap, tail_opt);
        if (row.tail_bound > 1e-250)
          rep.tail_constant = std::max(rep.tail_constant, std::max(row.tail_lower, row.tail_upper) / row.tail_bound);
      }
      if (!(row.ratio > 0.0 && std::isfinite(row.ratio))) {
        rep.all_finite_positive = false;
      } else {
        rep.min_ratio = std::min(rep.min_ratio, row.ratio);
        rep.max_ratio = std::max(rep.max_ratio, row.ratio);
      }
      rep.rows.push_back(std::move(row));
    }
  }
  if (rep.rows.empty()) rep.all_finite_positive = false;
  return rep;
}

void EquivalenceReport::write_csv(std::ostream& os) const {
  os << "x,t,W_series,W_integral,ratio,tail_bound,tail_lower,tail_upper\n";
  os.precision(12);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.x.size(); ++i) os << (i ? ";" : "") << r.x[i];
    os << ',' << r.t << ',' << r.w_series << ',' << r.w_integral << ',' << r.ratio << ',' << r.tail_bound << ','
       << r.tail_lower << ',' << r.tail_upper << '\n';
  }
}

std::string to_string(BlowupKind k) {
  switch (k) {
    case BlowupKind::StrongBlowup: return "StrongBlowup";
    case BlowupKind::Bounded: return "Bounded";
    case BlowupKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

BlowupResult blowup_classifier(const ClosedSet& F, const Point& x, const ProblemParams& params,
                               const std::vector<double>& tau_list, CapacityBackend& cap) {
  require(static_cast<int>(tau_list.size()) >= BlowupResult::kWindow, ErrorCode::InvalidArgument,
          "need at least three values of tau");
  for (std::size_t i = 0; i < tau_list.size(); ++i) {
    require(tau_list[i] > 0.0, ErrorCode::InvalidArgument, "tau must be positive");
    if (i) require(tau_list[i] < tau_list[i - 1], ErrorCode::InvalidArgument, "tau list must decrease");
  }
  BlowupResult r;
  r.tau = tau_list;
  const double e = 2.0 / (params.q - 1.0);
  for (double tau : tau_list) {
    double g = scaled_ball_capacity(F, x, tau, cap);
    r.g.push_back(g);
    r.g_scaled.push_back(std::pow(tau, -e) * g);
  }
  const std::size_t n = r.g.size(), w = BlowupResult::kWindow;
  double gmax = *std::max_element(r.g.end() - w, r.g.end());
  double gmin = *std::min_element(r.g.end() - w, r.g.end());
  if (gmax > 0.0 && (gmax - gmin) / gmax < BlowupResult::kSpread) {
    r.kind = BlowupKind::StrongBlowup;
    r.gamma = r.g.back();
    return r;
  }
  bool no_growth = true;
  for (std::size_t i = n - w + 1; i < n; ++i)
    if (r.g_scaled[i] > r.g_scaled[i - 1] * (1.0 + 1e-9)) no_growth = false;
  r.kind = no_growth ? BlowupKind::Bounded : BlowupKind::Inconclusive;
  return r;
}

}  // namespace parcap
