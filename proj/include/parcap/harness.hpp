#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "parcap/capacity.hpp"
#include "parcap/geometry.hpp"
#include "parcap/params.hpp"
#include "parcap/pde.hpp"

namespace parcap {

using Json = nlohmann::ordered_json;

enum class ExperimentKind { Capacity, Potential, Solve, Sandwich, Profile, Appendix };
std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// Set description used by configs and the CLI, e.g.
/// {"kind": "interval", "lo": -1, "hi": 1} or {"kind": "ball", "center": [0], "radius": 1}.
ClosedSet set_from_json(const Json& j, int N);

struct GoldenTolerances {
  double default_rel = 1e-6;
  double abs_floor = 1e-12;
  std::map<std::string, double> fields;  // by leaf key
  double for_field(const std::string& key) const;
};

/// One experiment, loaded from JSON with a strict schema ("parcap.experiment/1").
struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::Capacity;
  ProblemParams params = ProblemParams::make(1, 4.0);
  std::optional<Json> set;  // see set_from_json

  // PDE grid
  Geometry geometry = Geometry::Radial;
  Boundary boundary = Boundary::Dirichlet;
  double h = 0.01;
  double dt = 0.0;
  double T = 0.2;
  double lo = -5.0;  // line geometry
  double hi = 5.0;
  double R = 5.0;    // radial geometry
  std::vector<Point> xs;
  std::vector<double> ts;

  // backends
  CapacitySolver capacity_solver = CapacitySolver::DualNewton;
  bool closed_form = false;
  double capacity_h = 0.0;  // 0: automatic
  MaximalOptions maximal;
  bool refine = true;       // run the h/2 level where the experiment has one

  // solve experiment data: flat | gaussian | dirac
  std::string data = "flat";
  double data_value = 1e6;
  double data_width = 0.05;

  // profile experiment
  ProfileKind profile = ProfileKind::RadialVSS;

  // appendix experiment: kernest | integral | series | spherical | wiener
  std::string lemma = "integral";
  std::string sweep = "default";  // "default" or a sweep JSON path
  std::uint64_t seed = 1;

  std::string output_dir;  // empty: no files
  bool plots = true;
  GoldenTolerances tolerances;

  static ExperimentConfig from_json(const Json& j);
  static ExperimentConfig load(const std::string& path);
  Json to_json() const;
  /// Throws InvalidArgument on probes outside the box, a q-regime that does
  /// not fit the experiment, or a missing sweep file.
  void validate() const;
  SolverConfig solver() const;
  ClosedSet closed_set() const;
};

struct ExperimentResult {
  Json summary;
  bool pass = false;
  std::vector<std::string> files;  // written under output_dir
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct GoldenResult {
  bool pass = true;
  std::vector<std::string> differences;  // one line per offending field
};

/// Numeric leaves compare with per-field relative tolerances; differing keys,
/// array lengths or value types are schema mismatches.
GoldenResult golden_compare(const Json& run, const Json& golden, const GoldenTolerances& tol);
GoldenResult golden_compare_files(const std::string& run_path, const std::string& golden_path,
                                  const GoldenTolerances& tol);

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

/// Static SVG line plot; log_y plots log10 of positive values.
std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<PlotSeries>& series, bool log_y = false);

}  // namespace parcap
