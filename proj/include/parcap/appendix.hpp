#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "parcap/capacity.hpp"
#include "parcap/geometry.hpp"
#include "parcap/params.hpp"
#include "parcap/pde.hpp"

namespace parcap {

/// One evaluated sweep point.
struct InequalityRow {
  std::vector<double> parameters;
  double ratio = 0.0;          // LHS / envelope
  double ratio_refined = 0.0;  // same with the tighter oracle setting
};

struct InequalityReport {
  std::string name;
  std::string sweep;                   // human-readable sweep description
  std::vector<std::string> parameter_names;
  std::vector<InequalityRow> rows;     // sorted by parameters
  double max_ratio = 0.0;
  std::vector<double> argmax;
  double max_ratio_refined = 0.0;
  double refinement_change = 0.0;      // |max_refined / max - 1|
  double stability_tol = 0.05;
  bool pass = false;                   // max finite, positive and refinement-stable

  void finalize();
  std::string to_json() const;
  void write_csv(std::ostream& os) const;
};

// ---------------------------------------------------------------------------
// max { σ^{-N/2} e^{-ρ²/4σ} : 0 < σ <= t, at <= ρ² + σ <= bt }

struct KernelMax {
  double value = 0.0;       // closed form
  int branch = 0;           // 1 if a/2N > 1, else 2
  double sigma = 0.0;       // maximizer
  double rho = 0.0;
  double grid_value = 0.0;  // brute-force maximum
  double grid_sigma = 0.0;
  double grid_rho = 0.0;
  double relative_gap() const { return std::abs(grid_value - value) / value; }
};

double kernel_max_closed_form(double a, double b, double t, int N);
/// Closed form checked against a samples x samples grid over the constraint
/// set; OracleDisagreement beyond `tol` relative.
KernelMax kernel_max(double a, double b, double t, int N, int samples = 1000, double tol = 5e-3);
/// Upper bound e^{1/4} (2Nθ/t)^{N/2} e^{-a/4}, valid for θ >= 1/2N and θa >= 1.
double kernel_max_variant_bound(double a, double t, int N, double theta);

// ---------------------------------------------------------------------------
// ∫_0^1 (1-x)^{-a} x^{-b} e^{-A²/4(1-x)} e^{-B²/4x} dx against
// e^{-(A+B)²/4} A^{1-a} B^{1-b} (A+B)^{a+b-2}

struct IntegralTuple {
  double a = 0.0, b = 0.0, A = 0.0, B = 0.0;
};

double sharp_integral_ratio(double a, double b, double A, double B, double kappa, double epsrel = 1e-10);

struct IntegralSweep {
  int version = 1;
  double kappa = 1.0;
  std::string description;
  std::vector<IntegralTuple> tuples;

  /// a, b in {0.25, 0.5, 1, 2, 3}; A, B in {0.5, 1, 2, 4, 8} with AB > κ.
  static IntegralSweep default_sweep();
  static IntegralSweep load(const std::string& path);
  void save(const std::string& path) const;
};

InequalityReport integral_sweep_report(const IntegralSweep& sweep, double epsrel = 1e-9);
/// max over the sweep of |ratio(a,b,A,B) / ratio(b,a,B,A) - 1|.
double integral_symmetry_defect(const IntegralSweep& sweep, double epsrel = 1e-9);

// ---------------------------------------------------------------------------
// Σ_{p=1}^{n-ℓ} p^α (√n-√p)^β e^{-δ(√p + √γ(√n - √(p+1)))²} against n^{α-β/2} e^{-δn}

double series_bound_ratio(double alpha, double beta, double gamma, double delta, int ell, int n);
/// Rows for every n in `ns`; pass when max/min over the rows < `spread_limit`.
InequalityReport series_bound_report(double alpha, double beta, double gamma, double delta, int ell,
                                     const std::vector<int>& ns, double spread_limit = 10.0);

// ---------------------------------------------------------------------------
// Upper Wiener estimate and the global energy estimate

struct WienerProbe {
  Point x;
  double t = 0.0;
  double u = 0.0;     // ū_K(x, t)
  double sum = 0.0;   // t^{-N/2} Σ d_{n+1}^{N-2/(q-1)} e^{-n/4} C(K_n / d_{n+1})
  double ratio = 0.0; // u / sum (0 where sum = 0)
};

struct WienerLevel {
  double h = 0.0;
  std::vector<WienerProbe> probes;
  double fitted_constant = 0.0;  // max ratio
  double energy = 0.0;           // ∫∫_{|x|²+t > (r+ρ)²} u^q + ∫ u(T)
  double local_capacity = 0.0;   // C^{B_{r+ρ}}(K)
  double energy_ratio = 0.0;     // energy / local_capacity
};

struct WienerReport {
  std::vector<WienerLevel> levels;  // cfg.h, then cfg.h / 2
  double constant_drift = 0.0;
  double energy_drift = 0.0;
  double drift_tol = 0.3;
  bool degenerate = false;  // every sum is zero
  bool stable = false;
};

/// K ⊂ B_r(0); cfg.T must be >= (r+ρ)². Each level runs the maximal-solution
/// construction and one extra solve at the last (k, ε) for the energy.
WienerReport wiener_upper_consistency(const ClosedSet& K, double r, double rho, const SolverConfig& cfg,
                                      const std::vector<Point>& xs, const std::vector<double>& ts,
                                      const MaximalOptions& options = {}, const CapacityOptions& cap_options = {});

}  // namespace parcap
