#pragma once

#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "parcap/geometry.hpp"
#include "parcap/grid.hpp"
#include "parcap/params.hpp"

namespace parcap {

enum class CapacityMethod { ClosedFormScaling, VariationalNumeric, MonotoneBound };

std::string to_string(CapacityMethod m);

/// Capacity value with a bracket [bracket_lo, bracket_hi] containing it.
struct CapacityEstimate {
  double value = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  CapacityMethod method = CapacityMethod::VariationalNumeric;
  double h = 0.0;
  int iterations = 0;
};

enum class CapacitySolver { DualNewton, PrimalGradient };

struct CapacityOptions {
  /// Grid spacing; 0 selects min(h_default, min_feature/4) clamped to h_min.
  double h = 0.0;
  double h_default = 0.01;
  double h_min = 1e-3;
  /// Distance from K's bounding box to the periodic box edge; 0 selects
  /// max(diam K, 6).
  double margin = 0.0;
  /// Also solve at h/2 and widen the bracket with that result.
  bool refine_bracket = true;
  CapacitySolver solver = CapacitySolver::DualNewton;
  /// Relative duality gap at which the dual solver stops.
  double gap_tol = 1e-7;
  int max_newton = 200;
  /// Relative objective change at which the primal solver stops.
  double primal_tol = 1e-8;
  int max_primal = 50000;
  /// Zero-boundary variant: η = 0 outside the closed ball B_radius(center).
  std::optional<double> zero_outside_radius;
  Point zero_center;
};

/// Discretized capacity problem for a compact K on a periodic box.
struct CapacityProblem {
  ProblemParams params;
  ClosedSet K;
  UniformGrid grid;
  double s = 1.0;  // 2/q
  double p = 2.0;  // q'
  CapacityOptions options;

  /// Chooses h and the ambient box from K and the options.
  static CapacityProblem make(const ClosedSet& K, const ProblemParams& params, const CapacityOptions& options = {});
  /// Same K and box, spacing h (used for the h/2 bracket).
  CapacityProblem with_spacing(double h) const;
};

/// Solution of one discrete problem at one spacing.
struct DiscreteCapacity {
  double value = 0.0;  // dual objective (lower bound)
  double lower = 0.0;
  double upper = 0.0;
  int iterations = 0;
  std::vector<std::size_t> nodes;  // constrained K nodes
  std::vector<double> nu;          // multipliers on `nodes`
  std::vector<double> eta;         // near-optimal test function, full grid
};

/// Dual projected Newton-CG on the multipliers supported by K.
DiscreteCapacity solve_capacity_dual(const CapacityProblem& prob);
/// Projected gradient (Barzilai-Borwein steps, nonmonotone step halving) on η.
DiscreteCapacity solve_capacity_primal(const CapacityProblem& prob);
DiscreteCapacity solve_capacity(const CapacityProblem& prob);

/// Variational capacity; bracket from the duality gap and, if enabled, the h/2 solve.
CapacityEstimate capacity_numeric(const CapacityProblem& prob);

/// Capacitary measure: the multipliers of the active constraints η >= 1,
/// as atoms at the K nodes. Mass equals the capacity value.
RadonMeasure capacitary_measure(const CapacityProblem& prob);

/// Process-wide store of c_ball(N, q), optionally persisted to the JSON file
/// named by PARCAP_CACHE ({"N,q": c_ball}). Thread safe.
class CalibrationCache {
 public:
  static CalibrationCache& global();
  explicit CalibrationCache(std::optional<std::string> path);

  /// c_ball(N, q): capacity of the unit ball, computed once per key.
  double c_ball(const ProblemParams& params, const CapacityOptions& options = {});
  std::optional<double> lookup(const ProblemParams& params) const;
  void store(const ProblemParams& params, double value);
  void clear();
  const std::optional<std::string>& path() const { return path_; }

 private:
  static std::string key(const ProblemParams& params);
  void load();
  void save() const;

  std::optional<std::string> path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, double> values_;
};

/// Point → 0 and Ball(c, r) → c_ball(N, q) r^{N - 2/(q-1)}, for q >= q_c.
CapacityEstimate capacity_closed_form(const ClosedSet& K, const ProblemParams& params,
                                      CalibrationCache& cache = CalibrationCache::global());

/// (Σ_j C(G_j)) / C(∪_j G_j) for pairwise disjoint pieces.
double quasi_additivity_ratio(const std::vector<ClosedSet>& pieces, const ProblemParams& params,
                              const CapacityOptions& options = {});

struct LocalGlobalCapacity {
  double local = 0.0;   // η = 0 outside B_{r+ρ}
  double global = 0.0;  // large periodic box
  double ratio() const { return global > 0.0 ? local / global : 1.0; }
};

/// Capacity of K ⊂ B_r(0) relative to B_{r+ρ}(0) and to the whole box.
LocalGlobalCapacity local_vs_global_capacity(const ClosedSet& K, double r, double rho, const ProblemParams& params,
                                             const CapacityOptions& options = {});

/// Capacity oracle used by the potentials. Results are cached by the
/// similarity class of the set (translation, and reflection in 1-D).
class CapacityBackend {
 public:
  virtual ~CapacityBackend() = default;
  virtual double capacity(const ClosedSet& K) = 0;
};

class NumericCapacityBackend : public CapacityBackend {
 public:
  NumericCapacityBackend(const ProblemParams& params, CapacityOptions options, bool closed_form_balls = false);
  double capacity(const ClosedSet& K) override;
  std::size_t cache_size() const;
  std::size_t solves() const;
  const ProblemParams& params() const { return params_; }

 private:
  ProblemParams params_;
  CapacityOptions options_;
  bool closed_form_balls_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, double> cache_;
  std::size_t solves_ = 0;
};

}  // namespace parcap
