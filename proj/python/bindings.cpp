#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "parcap/appendix.hpp"
#include "parcap/capacity.hpp"
#include "parcap/error.hpp"
#include "parcap/harness.hpp"
#include "parcap/heat.hpp"
#include "parcap/pde.hpp"
#include "parcap/potential.hpp"

namespace py = pybind11;
using namespace parcap;

namespace {

CapacityOptions options_for(double h, const std::string& solver) {
  CapacityOptions o;
  o.h = h;
  if (solver == "primal") o.solver = CapacitySolver::PrimalGradient;
  else if (solver != "dual") throw Error(ErrorCode::InvalidArgument, "solver is 'dual' or 'primal'");
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Capacities, potentials and maximal solutions of u_t - Δu + u^q = 0";

  py::register_exception<Error>(m, "ParcapError", PyExc_RuntimeError);

  py::class_<ProblemParams>(m, "ProblemParams")
      .def(py::init(&ProblemParams::make), py::arg("N"), py::arg("q"))
      .def_readonly("N", &ProblemParams::N)
      .def_readonly("q", &ProblemParams::q)
      .def_readonly("qprime", &ProblemParams::qprime)
      .def_readonly("qc", &ProblemParams::qc)
      .def_readonly("supercritical", &ProblemParams::supercritical)
      .def("universal_bound", &ProblemParams::universal_bound, py::arg("t"));

  py::class_<ClosedSet>(m, "ClosedSet")
      .def_static("empty", &ClosedSet::empty, py::arg("dim"))
      .def_static("point", &ClosedSet::point, py::arg("center"))
      .def_static("ball", &ClosedSet::ball, py::arg("center"), py::arg("radius"))
      .def_static("annulus", &ClosedSet::annulus, py::arg("center"), py::arg("r_in"), py::arg("r_out"))
      .def_static("interval", &ClosedSet::interval, py::arg("lo"), py::arg("hi"))
      .def_static("cantor", &ClosedSet::cantor, py::arg("lo"), py::arg("hi"), py::arg("ratio"), py::arg("depth"))
      .def_static("unite", &ClosedSet::unite, py::arg("members"))
      .def("dim", &ClosedSet::dim)
      .def("dist", &ClosedSet::dist, py::arg("x"))
      .def("kind", &ClosedSet::kind)
      .def("__repr__", &ClosedSet::describe);

  m.def(
      "capacity",
      [](const ClosedSet& K, const ProblemParams& P, double h, const std::string& solver, bool refine) {
        auto o = options_for(h, solver);
        o.refine_bracket = refine;
        auto e = capacity_numeric(CapacityProblem::make(K, P, o));
        py::dict d;
        d["value"] = e.value;
        d["bracket_lo"] = e.bracket_lo;
        d["bracket_hi"] = e.bracket_hi;
        d["h"] = e.h;
        d["iterations"] = e.iterations;
        return d;
      },
      py::arg("K"), py::arg("params"), py::arg("h") = 0.0, py::arg("solver") = "dual", py::arg("refine") = false,
      "Numeric capacity with its bracket.");

  m.def(
      "capacitary_measure",
      [](const ClosedSet& K, const ProblemParams& P, double h) {
        auto mu = capacitary_measure(CapacityProblem::make(K, P, options_for(h, "dual")));
        std::vector<std::pair<Point, double>> atoms;
        for (const auto& a : mu.atoms) atoms.emplace_back(a.location, a.mass);
        return atoms;
      },
      py::arg("K"), py::arg("params"), py::arg("h") = 0.0, "Atoms (location, mass) of the capacitary measure.");

  py::class_<NumericCapacityBackend>(m, "CapacityBackend")
      .def(py::init([](const ProblemParams& P, double h) { return new NumericCapacityBackend(P, options_for(h, "dual")); }),
           py::arg("params"), py::arg("h") = 0.0)
      .def("capacity", &NumericCapacityBackend::capacity, py::arg("K"))
      .def("cache_size", &NumericCapacityBackend::cache_size);

  m.def(
      "W_series",
      [](const ClosedSet& F, const Point& x, double t, const ProblemParams& P, NumericCapacityBackend& cap) {
        return W_series(F, x, t, P, cap);
      },
      py::arg("F"), py::arg("x"), py::arg("t"), py::arg("params"), py::arg("backend"));
  m.def(
      "W_integral",
      [](const ClosedSet& F, const Point& x, double t, const ProblemParams& P, NumericCapacityBackend& cap) {
        return W_integral(F, x, t, P, cap);
      },
      py::arg("F"), py::arg("x"), py::arg("t"), py::arg("params"), py::arg("backend"));

  py::enum_<Geometry>(m, "Geometry").value("Line", Geometry::Line).value("Radial", Geometry::Radial);
  py::enum_<Boundary>(m, "Boundary").value("Dirichlet", Boundary::Dirichlet).value("Neumann", Boundary::Neumann);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def_static("line", &SolverConfig::line, py::arg("params"), py::arg("lo"), py::arg("hi"), py::arg("h"),
                  py::arg("T"))
      .def_static("radial", &SolverConfig::radial, py::arg("params"), py::arg("R"), py::arg("h"), py::arg("T"))
      .def_readwrite("dt", &SolverConfig::dt)
      .def_readwrite("boundary", &SolverConfig::boundary)
      .def_readonly("h", &SolverConfig::h)
      .def_readonly("T", &SolverConfig::T)
      .def("nodes", [](const SolverConfig& c) {
        auto g = c.grid();
        std::vector<double> x(g.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = g.lo[0] + g.h * static_cast<double>(i);
        return x;
      });

  m.def(
      "solve",
      [](const std::vector<double>& u0, const SolverConfig& cfg, const std::vector<double>& times) {
        GridFunction g(cfg.grid(), u0);
        auto tr = solve_cauchy(g, cfg, times);
        std::vector<std::vector<double>> out;
        for (auto& s : tr.snapshots) out.push_back(s.values);
        py::dict d;
        d["snapshots"] = out;
        d["mass0"] = tr.history.front().mass;
        d["massT"] = tr.history.back().mass;
        d["absorbed"] = tr.absorbed(0.0, cfg.T);
        return d;
      },
      py::arg("u0"), py::arg("config"), py::arg("times"), "Grid values at the requested times.");

  m.def(
      "maximal_solution",
      [](const ClosedSet& F, const SolverConfig& cfg, const std::vector<double>& times, const std::vector<double>& eps) {
        MaximalOptions o;
        if (!eps.empty()) o.eps_list = eps;
        auto r = maximal_solution(F, cfg, times, o);
        std::vector<std::vector<double>> out;
        for (const auto& f : r.final_fields()) out.push_back(f.values);
        return out;
      },
      py::arg("F"), py::arg("config"), py::arg("times"), py::arg("eps") = std::vector<double>{},
      "Finest-level approximation of the maximal solution at each time.");

  m.def(
      "profile",
      [](const ProblemParams& P, const std::string& kind) {
        auto pr = very_singular_profile(P, kind == "halfline" ? ProfileKind::HalfLine : ProfileKind::RadialVSS);
        return std::make_pair(pr.y, pr.f);
      },
      py::arg("params"), py::arg("kind") = "radial", "Self-similar profile samples (y, f).");

  m.def("heat_kernel", &heat_kernel, py::arg("x"), py::arg("y"), py::arg("t"));
  m.def("spherical_integral", &spherical_integral, py::arg("N"), py::arg("m"));
  m.def("spherical_recursion", &spherical_recursion, py::arg("N"), py::arg("m"));
  m.def("kernel_max_closed_form", &kernel_max_closed_form, py::arg("a"), py::arg("b"), py::arg("t"), py::arg("N"));
  m.def(
      "kernel_max",
      [](double a, double b, double t, int N, int samples) {
        auto k = kernel_max(a, b, t, N, samples);
        return std::make_tuple(k.value, k.grid_value, k.branch);
      },
      py::arg("a"), py::arg("b"), py::arg("t"), py::arg("N"), py::arg("samples") = 1000);
  m.def("sharp_integral_ratio", &sharp_integral_ratio, py::arg("a"), py::arg("b"), py::arg("A"), py::arg("B"),
        py::arg("kappa") = 1.0, py::arg("epsrel") = 1e-10);
  m.def("series_bound_ratio", &series_bound_ratio, py::arg("alpha"), py::arg("beta"), py::arg("gamma"),
        py::arg("delta"), py::arg("ell"), py::arg("n"));

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        auto cfg = ExperimentConfig::from_json(Json::parse(config_json));
        auto res = run_experiment(cfg);
        return std::make_pair(res.summary.dump(), res.pass);
      },
      py::arg("config_json"), "Runs an experiment config; returns (summary JSON, pass).");
}
