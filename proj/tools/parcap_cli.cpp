// Command-line front end: one subcommand per experiment kind, plus `all`.
// Exit status: 0 pass, 2 failed assertion, 1 usage or configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "parcap/error.hpp"
#include "parcap/harness.hpp"

using namespace parcap;

namespace {

struct Flags {
  std::string config, out, golden, bless, name;
  std::optional<int> N;
  std::optional<double> q;
  std::string set;
  std::optional<double> radius, r_in, r_out, set_lo, set_hi, ratio;
  std::optional<int> depth;
  std::vector<double> center;
  std::optional<double> h, dt, T, R, box_lo, box_hi, cap_h;
  std::string geometry, boundary, solver;
  std::vector<double> xs, ts, eps, ks;
  bool closed_form = false, no_refine = false, no_plots = false;
  std::string data;
  std::optional<double> value, width;
  std::string kind, lemma, sweep;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "experiment JSON (flags below override it)")->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "output directory");
  app->add_option("--golden", f.golden, "compare summary.json with this golden file")->check(CLI::ExistingFile);
  app->add_option("--bless", f.bless, "write the summary as a golden file");
  app->add_option("--name", f.name, "experiment name");
  app->add_option("--N", f.N, "dimension")->check(CLI::Range(1, 8));
  app->add_option("--q", f.q, "exponent q > 1");
  app->add_option("--set", f.set, "set kind")
      ->check(CLI::IsMember({"empty", "point", "ball", "annulus", "interval", "cantor"}));
  app->add_option("--radius", f.radius, "ball radius");
  app->add_option("--r-in", f.r_in, "annulus inner radius");
  app->add_option("--r-out", f.r_out, "annulus outer radius");
  app->add_option("--lo", f.set_lo, "interval / Cantor left end");
  app->add_option("--hi", f.set_hi, "interval / Cantor right end");
  app->add_option("--ratio", f.ratio, "Cantor ratio in (0, 1/2)");
  app->add_option("--depth", f.depth, "Cantor depth");
  app->add_option("--center", f.center, "set center");
  app->add_option("--h", f.h, "solver grid spacing");
  app->add_option("--dt", f.dt, "time step (0: h^2/4)");
  app->add_option("--T", f.T, "final time");
  app->add_option("--R", f.R, "radial box radius");
  app->add_option("--box-lo", f.box_lo, "line box left end");
  app->add_option("--box-hi", f.box_hi, "line box right end");
  app->add_option("--geometry", f.geometry, "line or radial")->check(CLI::IsMember({"line", "radial"}));
  app->add_option("--boundary", f.boundary, "dirichlet or neumann")->check(CLI::IsMember({"dirichlet", "neumann"}));
  app->add_option("--x", f.xs, "probe points (1-D coordinates; radial probes lie on the first axis)");
  app->add_option("--t", f.ts, "probe times");
  app->add_option("--eps", f.eps, "neighbourhood radii, decreasing");
  app->add_option("--k", f.ks, "data levels, increasing");
  app->add_option("--cap-h", f.cap_h, "capacity grid spacing");
  app->add_option("--solver", f.solver, "dual or primal")->check(CLI::IsMember({"dual", "primal"}));
  app->add_flag("--closed-form", f.closed_form, "closed-form ball capacities");
  app->add_flag("--no-refine", f.no_refine, "skip the refinement level");
  app->add_flag("--no-plots", f.no_plots, "do not write SVG plots");
}

Json set_json(const Flags& f, int N) {
  auto c = f.center.empty() ? Json(std::vector<double>(N, 0.0)) : Json(f.center);
  if (f.set == "empty") return {{"kind", "empty"}};
  if (f.set == "point") return {{"kind", "point"}, {"center", c}};
  if (f.set == "ball") return {{"kind", "ball"}, {"center", c}, {"radius", f.radius.value_or(1.0)}};
  if (f.set == "annulus")
    return {{"kind", "annulus"}, {"center", c}, {"r_in", f.r_in.value_or(0.5)}, {"r_out", f.r_out.value_or(1.0)}};
  if (f.set == "cantor")
    return {{"kind", "cantor"}, {"lo", f.set_lo.value_or(-1.0)}, {"hi", f.set_hi.value_or(1.0)},
            {"ratio", f.ratio.value_or(1.0 / 3.0)}, {"depth", f.depth.value_or(6)}};
  return {{"kind", "interval"}, {"lo", f.set_lo.value_or(-1.0)}, {"hi", f.set_hi.value_or(1.0)}};
}

ExperimentConfig defaults(ExperimentKind kind, const std::string& lemma) {
  ExperimentConfig c;
  c.kind = kind;
  c.name = to_string(kind);
  c.params = ProblemParams::make(1, 4.0);
  c.set = Json{{"kind", "interval"}, {"lo", -1.0}, {"hi", 1.0}};
  c.xs = {{0.0}, {0.5}, {1.0}, {1.5}, {2.0}};
  c.ts = {0.05, 0.1, 0.2};
  c.maximal.eps_list = {0.04, 0.02, 0.01};
  switch (kind) {
    case ExperimentKind::Solve:
      c.params = ProblemParams::make(1, 2.0);
      c.geometry = Geometry::Line;
      c.boundary = Boundary::Neumann;
      c.lo = -1.0;
      c.hi = 1.0;
      c.h = 0.02;
      c.T = 1.0;
      c.xs = {{0.0}};
      c.ts = {0.1, 0.25, 0.5, 1.0};
      break;
    case ExperimentKind::Profile:
      c.params = ProblemParams::make(1, 2.0);
      break;
    case ExperimentKind::Appendix:
      c.lemma = lemma.empty() ? "integral" : lemma;
      if (c.lemma == "wiener") {
        c.set = Json{{"kind", "interval"}, {"lo", -0.5}, {"hi", 0.5}};
        c.R = 6.0;
        c.h = 0.02;
        c.T = 1.0;
        c.xs = {{0.0}, {0.5}, {1.0}, {2.0}};
        c.ts = {0.05, 0.2, 1.0};
        c.maximal.eps_list = {0.08, 0.04, 0.02};
      }
      break;
    default:
      break;
  }
  return c;
}

ExperimentConfig build(ExperimentKind kind, const Flags& f) {
  ExperimentConfig c = f.config.empty() ? defaults(kind, f.lemma) : ExperimentConfig::load(f.config);
  if (!f.config.empty() && c.kind != kind)
    throw Error(ErrorCode::InvalidArgument, "config is a '" + to_string(c.kind) + "' experiment");
  if (f.N || f.q) c.params = ProblemParams::make(f.N.value_or(c.params.N), f.q.value_or(c.params.q));
  if (!f.set.empty()) c.set = set_json(f, c.params.N);
  if (!f.name.empty()) c.name = f.name;
  if (f.h) c.h = *f.h;
  if (f.dt) c.dt = *f.dt;
  if (f.T) c.T = *f.T;
  if (f.R) c.R = *f.R;
  if (f.box_lo) c.lo = *f.box_lo;
  if (f.box_hi) c.hi = *f.box_hi;
  if (!f.geometry.empty()) c.geometry = f.geometry == "line" ? Geometry::Line : Geometry::Radial;
  if (!f.boundary.empty()) c.boundary = f.boundary == "neumann" ? Boundary::Neumann : Boundary::Dirichlet;
  if (!f.xs.empty()) {
    c.xs.clear();
    for (double x : f.xs) {
      Point p(c.params.N, 0.0);
      p[0] = x;
      c.xs.push_back(p);
    }
  } else if (c.params.N > 1) {
    for (auto& x : c.xs) x.resize(c.params.N, 0.0);
  }
  if (!f.ts.empty()) c.ts = f.ts;
  if (!f.eps.empty()) c.maximal.eps_list = f.eps;
  if (!f.ks.empty()) c.maximal.k_list = f.ks;
  if (f.cap_h) c.capacity_h = *f.cap_h;
  if (!f.solver.empty()) c.capacity_solver = f.solver == "dual" ? CapacitySolver::DualNewton : CapacitySolver::PrimalGradient;
  if (f.closed_form) c.closed_form = true;
  if (f.no_refine) c.refine = false;
  if (f.no_plots) c.plots = false;
  if (!f.out.empty()) c.output_dir = f.out;
  if (!f.data.empty()) c.data = f.data;
  if (f.value) c.data_value = *f.value;
  if (f.width) c.data_width = *f.width;
  if (!f.kind.empty()) c.profile = f.kind == "halfline" ? ProfileKind::HalfLine : ProfileKind::RadialVSS;
  if (!f.lemma.empty()) c.lemma = f.lemma;
  if (!f.sweep.empty()) c.sweep = f.sweep;
  if (f.seed) c.seed = *f.seed;
  return c;
}

int run_one(const ExperimentConfig& cfg, const Flags& f) {
  ExperimentResult res = run_experiment(cfg);
  std::cout << res.summary.dump(2) << std::endl;
  bool ok = res.pass;
  if (!f.bless.empty()) {
    std::ofstream out(f.bless);
    out << res.summary.dump(2) << '\n';
  }
  if (!f.golden.empty()) {
    std::ifstream in(f.golden);
    Json golden;
    try {
      in >> golden;
    } catch (const Json::exception& e) {
      std::cerr << "golden: unreadable: " << e.what() << '\n';
      return 2;
    }
    auto g = golden_compare(res.summary, golden, cfg.tolerances);
    for (const auto& d : g.differences) std::cerr << "golden: " << d << '\n';
    std::cerr << "golden: " << (g.pass ? "match" : "MISMATCH") << '\n';
    ok = ok && g.pass;
  }
  std::cerr << cfg.name << ": " << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 2;
}

int run_all(const Flags& f) {
  const std::string root = f.out.empty() ? "parcap_out" : f.out;
  struct Item {
    ExperimentKind kind;
    std::string lemma;
  };
  const std::vector<Item> items{{ExperimentKind::Capacity, ""},  {ExperimentKind::Potential, ""},
                                {ExperimentKind::Solve, ""},     {ExperimentKind::Sandwich, ""},
                                {ExperimentKind::Profile, ""},   {ExperimentKind::Appendix, "kernest"},
                                {ExperimentKind::Appendix, "integral"}, {ExperimentKind::Appendix, "series"},
                                {ExperimentKind::Appendix, "spherical"}};
  int status = 0;
  for (const auto& it : items) {
    ExperimentConfig c = defaults(it.kind, it.lemma);
    c.name = to_string(it.kind) + (it.lemma.empty() ? "" : "_" + it.lemma);
    c.output_dir = (std::filesystem::path(root) / c.name).string();
    if (f.no_plots) c.plots = false;
    try {
      auto res = run_experiment(c);
      std::cout << c.name << ": " << (res.pass ? "PASS" : "FAIL") << '\n';
      if (!res.pass) status = 2;
    } catch (const Error& e) {
      std::cout << c.name << ": ERROR " << e.what() << '\n';
      status = 2;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments for parabolic capacities, potentials and maximal solutions"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  Flags f;
  auto* cap = app.add_subcommand("capacity", "capacity of a set, bracket and capacitary mass");
  auto* pot = app.add_subcommand("potential", "series vs integral potential over a probe grid");
  auto* sol = app.add_subcommand("solve", "solve the Cauchy problem and probe u");
  auto* snd = app.add_subcommand("sandwich", "maximal solution vs capacitary potential");
  auto* prf = app.add_subcommand("profile", "self-similar profile by shooting");
  auto* apx = app.add_subcommand("appendix", "checks of the auxiliary inequalities");
  auto* all = app.add_subcommand("all", "run every experiment with default settings");
  for (auto* s : {cap, pot, sol, snd, prf, apx}) add_common(s, f);
  sol->add_option("--data", f.data, "initial data")->check(CLI::IsMember({"flat", "gaussian", "dirac"}));
  sol->add_option("--value", f.value, "flat level, Gaussian mass or Dirac mass");
  sol->add_option("--width", f.width, "Gaussian variance parameter s in e^{-x^2/4s}");
  prf->add_option("--kind", f.kind, "radial or halfline")->check(CLI::IsMember({"radial", "halfline"}));
  apx->add_option("--lemma", f.lemma, "which inequality")
      ->check(CLI::IsMember({"kernest", "integral", "series", "spherical", "wiener"}));
  apx->add_option("--sweep", f.sweep, "'default' or a sweep JSON file");
  apx->add_option("--seed", f.seed, "seed for sampled tuples");
  all->add_option("--out", f.out, "output root directory");
  all->add_flag("--no-plots", f.no_plots, "do not write SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (all->parsed()) return run_all(f);
    ExperimentKind kind = cap->parsed()   ? ExperimentKind::Capacity
                          : pot->parsed() ? ExperimentKind::Potential
                          : sol->parsed() ? ExperimentKind::Solve
                          : snd->parsed() ? ExperimentKind::Sandwich
                          : prf->parsed() ? ExperimentKind::Profile
                                          : ExperimentKind::Appendix;
    ExperimentConfig cfg = build(kind, f);
    try {
      cfg.validate();
    } catch (const Error& e) {
      std::cerr << "usage: " << e.what() << '\n';
      return 1;
    }
    return run_one(cfg, f);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::InvalidArgument:
      case ErrorCode::SchemaMismatch:
      case ErrorCode::NoProfileRegime:
      case ErrorCode::UnboundedSet:
        return 1;
      default:
        return 2;
    }
  }
}
