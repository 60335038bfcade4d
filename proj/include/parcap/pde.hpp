#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "parcap/capacity.hpp"
#include "parcap/geometry.hpp"
#include "parcap/grid.hpp"
#include "parcap/params.hpp"

namespace parcap {

/// Line: the interval [lo, hi]. Radial: r = |x| in [0, R] for radially
/// symmetric data; with N = 1 this is the even half-line.
enum class Geometry { Line, Radial };
enum class Boundary { Dirichlet, Neumann };
/// ExactFlow integrates u' = -u^q exactly over each step; BackwardEuler
/// solves v + Δt v^q = u* by Newton.
enum class Absorption { ExactFlow, BackwardEuler, Off };

struct SolverConfig {
  ProblemParams params;
  Geometry geometry = Geometry::Line;
  double lo = -1.0;  // Line only
  double hi = 1.0;   // Line: right end; Radial: R
  double h = 0.01;
  double dt = 0.0;   // 0 selects h^2/4
  double T = 1.0;
  Boundary boundary = Boundary::Dirichlet;
  Absorption absorption = Absorption::ExactFlow;
  /// If set to ρ, StepRecord::q_mass_exterior integrates u^q over |x|^2 + t > ρ^2.
  std::optional<double> parabolic_radius;

  static SolverConfig line(const ProblemParams& params, double lo, double hi, double h, double T);
  static SolverConfig radial(const ProblemParams& params, double R, double h, double T);

  double time_step() const { return dt > 0.0 ? dt : 0.25 * h * h; }
  UniformGrid grid() const;
  /// Coordinate used for grid lookups: x[0] on a line, |x| radially.
  double coordinate(const Point& x) const;
  /// Quadrature weights: ∫ u dx ≈ Σ w_i u_i (sphere area included).
  std::vector<double> mass_weights() const;
  void validate() const;
};

struct StepRecord {
  double t = 0.0;
  double mass = 0.0;     // ∫ u
  double q_mass = 0.0;   // ∫ u^q
  double q_mass_exterior = 0.0;
};

struct Trajectory {
  SolverConfig cfg;
  std::vector<GridFunction> snapshots;  // at the requested times, in order
  std::vector<StepRecord> history;      // every step, starting at t = 0
  /// ∫_s^T ∫ u^q by the trapezoid rule over the step history.
  double absorbed(double s, double T) const;
  /// ∫∫ u^q over {|x|^2 + t > ρ^2} ∩ (0, T) with ρ = cfg.parabolic_radius.
  double absorbed_exterior() const;
  double mass_at(double t) const;
};

/// One Strang step of size dt: absorption over dt/2, (I - dt Δ_h) u* = u,
/// absorption over dt/2. Absorbing first keeps huge data from leaking
/// through the exponential tail of the implicit resolvent.
GridFunction step(const GridFunction& u, const SolverConfig& cfg, double dt);
GridFunction step(const GridFunction& u, const SolverConfig& cfg);

/// Nonnegative grid data from a measure: atoms as mass-preserving hats of
/// half-width h (radially: spread over the sphere |y| = |a|), densities interpolated.
GridFunction discretize(const RadonMeasure& mu, const SolverConfig& cfg);

/// Runs from u0 to cfg.T, storing snapshots at `times` (within (0, T]).
/// Throws MaximumPrincipleViolated if u > ((q-1)t)^{-1/(q-1)} (1 + 1e-6) anywhere.
Trajectory solve_cauchy(const GridFunction& u0, const SolverConfig& cfg, const std::vector<double>& times);
Trajectory solve_cauchy(const RadonMeasure& mu, const SolverConfig& cfg, const std::vector<double>& times);

/// Probe value at (x, snapshot) by linear interpolation.
double probe(const GridFunction& u, const SolverConfig& cfg, const Point& x);

struct ProbeRow {
  Point x;
  double t = 0.0;
  double u = 0.0;
  double bound = 0.0;  // ((q-1)t)^{-1/(q-1)}
  double slack = 0.0;  // bound - u
};
std::vector<ProbeRow> probe_table(const Trajectory& tr, const std::vector<Point>& xs);
void write_probe_csv(std::ostream& os, const std::vector<ProbeRow>& rows);
/// Snapshot format: header "# t=<time> h=<h> lo=<lo> geometry=<line|radial>", then "x,u" rows.
void write_snapshot_csv(std::ostream& os, const GridFunction& u, const SolverConfig& cfg);

struct MaximalOptions {
  std::vector<double> k_list{1e2, 1e4, 1e6, 1e8};
  std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
  double tol_k = 1e-4;   // relative to max u_k
  double slack = 1e-10;  // monotonicity slack, relative to max u
};

struct MaximalLevel {
  double eps = 0.0;
  double k_used = 0.0;
  bool k_converged = false;
  std::vector<GridFunction> fields;  // one per probe time
};

struct MaximalResult {
  std::vector<double> times;
  std::vector<MaximalLevel> levels;  // one per ε, in the given order
  bool monotone_in_eps = true;
  const std::vector<GridFunction>& final_fields() const { return levels.back().fields; }
  /// Value at (x, times[i]) for every ε level.
  std::vector<double> trace(const SolverConfig& cfg, const Point& x, std::size_t time_index) const;
};

/// ε-neighbourhood indicator χ_{F_ε} on the solver grid (nearest node if none).
GridFunction neighbourhood_indicator(const ClosedSet& F, double eps, const SolverConfig& cfg);

/// ū_F as the limit of u_{k, F_ε}: k ↑ until |u_{k'} - u_k|_∞ < tol_k max u_k, then ε ↓.
MaximalResult maximal_solution(const ClosedSet& F, const SolverConfig& cfg, const std::vector<double>& times,
                               const MaximalOptions& options = {});

struct SigmaModerateResult {
  std::vector<double> times;
  std::vector<GridFunction> fields;                 // pointwise max over the family
  std::vector<std::vector<GridFunction>> partial;   // running max after each member
};

/// Pointwise max of u_μ over the family.
SigmaModerateResult sigma_moderate_sup(const std::vector<RadonMeasure>& family, const SolverConfig& cfg,
                                       const std::vector<double>& times);

/// {λ ν_K : λ in lambdas} with ν_K the capacitary measure of K.
std::vector<RadonMeasure> capacitary_family(const ClosedSet& K, const ProblemParams& params,
                                            const std::vector<double>& lambdas, const CapacityOptions& options = {});

enum class ProfileKind { RadialVSS, HalfLine };

/// Self-similar profile f with f'' + ((N-1)/y + y/2) f' + f/(q-1) - f^q = 0,
/// f'(0) = 0 and |y|^{2/(q-1)} f(y) -> 0. HalfLine uses N = 1.
struct Profile {
  ProfileKind kind = ProfileKind::RadialVSS;
  ProblemParams params;
  int dim = 1;
  double dy = 0.0;
  std::vector<double> y, f, fp;
  double tail_constant = 0.0;  // C in f ~ C y^{2/(q-1)-dim} e^{-y^2/4}
  /// Grid values are used up to y_trust; the shot near y_max is steered by
  /// the bisection and is replaced by the tail law beyond it.
  double y_trust = 0.0;
  double value(double y) const;
  double f0() const { return f.front(); }
};

struct ProfileOptions {
  double y_max = 10.0;
  double dy = 1e-3;
  double window = 1e-6;  // required |y|^{2/(q-1)} f(y_max)
};

Profile very_singular_profile(const ProblemParams& params, ProfileKind kind, const ProfileOptions& options = {});

struct SandwichRow {
  Point x;
  double t = 0.0;
  double u = 0.0;
  double W = 0.0;
  double ratio = 0.0;
  bool anomaly = false;  // W = 0 while u > anomaly_tol t^{-1/(q-1)}
};

struct SandwichReport {
  std::vector<SandwichRow> rows;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  int anomalies = 0;
  bool finite_positive = false;
  double spread() const { return min_ratio > 0.0 ? max_ratio / min_ratio : 0.0; }
  void write_csv(std::ostream& os) const;
};

/// ū_F / W_F over the probe grid.
SandwichReport bilateral_check(const ClosedSet& F, const SolverConfig& cfg, CapacityBackend& cap,
                               const std::vector<Point>& xs, const std::vector<double>& ts,
                               const MaximalOptions& options = {}, double anomaly_tol = 1e-2);

struct SubcriticalReport {
  Profile profile;
  double sup_gap = 0.0;           // sup_{|y|<=y_window} |t^{1/(q-1)} u(y√t, t) - f(y)| at t_check
  double lower_min_ratio = 0.0;   // min over probes of u / (t^{-1/(q-1)} f(|x|/√t))
  bool lower_bound_holds = false; // ratio >= 0.95 everywhere
  double up1_constant = 0.0;      // fitted C of the up1 envelope
  double up1_spread = 0.0;        // max/min of u/envelope over probes
  std::vector<ProbeRow> probes;
};

/// F = {0}, 1 < q < q_c: compares ū_{0} with the self-similar profile.
SubcriticalReport subcritical_bounds_check(const SolverConfig& cfg, double t_check, double y_window,
                                           const std::vector<Point>& xs, const std::vector<double>& ts,
                                           const MaximalOptions& options = {});

struct HalfLineBoundReport {
  double max_ratio = 0.0;  // max over probes with |x| >= r of u / (t^{-1/(q-1)} f_1((|x|-r)/√t))
  Point argmax;
  double t_argmax = 0.0;
  bool holds = false;      // max_ratio <= 1.05
};

/// N = 1, 1 < q < 3, F = [-r, r]: ū_F against t^{-1/(q-1)} f_1((|x|-r)/√t).
/// Probes with f_1 <= 1e-8 are skipped.
HalfLineBoundReport halfline_upper_check(double r, const SolverConfig& cfg, const std::vector<Point>& xs,
                                         const std::vector<double>& ts, const MaximalOptions& options = {});

}  // namespace parcap
