#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parcap/capacity.hpp"
#include "parcap/geometry.hpp"
#include "parcap/params.hpp"

namespace parcap {

struct Slice {
  int n = 0;
  ClosedSet piece;     // F_n = F ∩ {√(nt) <= |x-y| <= √((n+1)t)}
  double d_next = 0.0;  // d_{n+1} = √((n+1)t)
};

/// Non-empty parabolic slices of F around x; a_t = min{n : F ⊂ B_{d_{n+1}}(x)}.
struct Slicing {
  Point x;
  double t = 0.0;
  int a_t = 0;
  std::vector<Slice> slices;
};

Slicing slice(const ClosedSet& F, const Point& x, double t);

struct SeriesOptions {
  /// Terms whose a-priori bound C(B_1)(n+1)^e e^{-n/4}/(1-e^{-1/4}) falls
  /// below this fraction of the running sum end the summation.
  double truncation = 1e-10;
};

/// W_F(x,t) = t^{-1/(q-1)} Σ_n (n+1)^{N/2-1/(q-1)} e^{-n/4} C(F_n / d_{n+1}).
double W_series(const ClosedSet& F, const Point& x, double t, const ProblemParams& params, CapacityBackend& cap,
                const SeriesOptions& options = {});

struct IntegralOptions {
  int panels = 8;
  int nodes_per_panel = 8;
};

/// g(s) = C(((F - x)/s) ∩ B_1(0)).
double scaled_ball_capacity(const ClosedSet& F, const Point& x, double s, CapacityBackend& cap);

/// t^{-1-N/2} ∫_{s0}^{s1} s^{N-2/(q-1)} e^{-s^2/4t} g(s) s ds by composite
/// Gauss-Legendre with panel breaks where the geometry of (F - x)/s ∩ B_1 changes.
double integral_potential_segment(const ClosedSet& F, const Point& x, double t, double s0, double s1,
                                  const ProblemParams& params, CapacityBackend& cap,
                                  const IntegralOptions& options = {});

/// 𝒲_F(x,t): the segment over (0, D_F(x)].
double W_integral(const ClosedSet& F, const Point& x, double t, const ProblemParams& params, CapacityBackend& cap,
                  const IntegralOptions& options = {});

/// t^{(q-3)/(2(q-1))} e^{-D_F(x)^2/4t} / D_F(x).
double tail_envelope(const ClosedSet& F, const Point& x, double t, const ProblemParams& params);

struct EquivalenceRow {
  Point x;
  double t = 0.0;
  double w_series = 0.0;
  double w_integral = 0.0;
  double ratio = 0.0;       // W_integral / W_series (0 when W_series = 0)
  double tail_bound = 0.0;  // tail_envelope
  double tail_lower = 0.0;  // 𝒲 - ∫_0^{√(t a_t)}
  double tail_upper = 0.0;  // ∫_0^{√(t(a_t+2))} - 𝒲
};

struct EquivalenceReport {
  std::vector<EquivalenceRow> rows;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  /// max over rows of max(tail_lower, tail_upper) / tail_bound.
  double tail_constant = 0.0;
  bool all_finite_positive = false;

  void write_csv(std::ostream& os) const;
};

EquivalenceReport equivalence_report(const ClosedSet& F, const std::vector<Point>& xs, const std::vector<double>& ts,
                                     const ProblemParams& params, CapacityBackend& cap,
                                     const IntegralOptions& options = {});

enum class BlowupKind { StrongBlowup, Bounded, Inconclusive };
std::string to_string(BlowupKind k);

struct BlowupResult {
  BlowupKind kind = BlowupKind::Inconclusive;
  double gamma = 0.0;             // limit of g(τ) for StrongBlowup
  std::vector<double> tau;
  std::vector<double> g;          // C((F/τ) ∩ B_1(x))
  std::vector<double> g_scaled;   // τ^{-2/(q-1)} g(τ)
  /// The 5% spread and 3-point window are fixed by this library, not derived.
  static constexpr double kSpread = 0.05;
  static constexpr int kWindow = 3;
};

/// Classifies from g over τ_list (strictly decreasing, at least 3 entries).
BlowupResult blowup_classifier(const ClosedSet& F, const Point& x, const ProblemParams& params,
                               const std::vector<double>& tau_list, CapacityBackend& cap);

}  // namespace parcap
