#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "parcap/appendix.hpp"
#include "parcap/error.hpp"
#include "support.hpp"

using namespace parcap;
using testsupport::Rng;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

// For fixed σ the best feasible ρ² is max(0, at - σ); scan σ, then polish
// around the best sample by golden section.
double kernel_max_oracle(double a, double t, int N, int samples) {
  auto g = [&](double s) { return std::pow(s, -0.5 * N) * std::exp(-std::max(0.0, a * t - s) / (4.0 * s)); };
  double best = 0.0, arg = t;
  for (int i = 1; i <= samples; ++i) {
    const double s = t * i / samples;
    if (g(s) > best) {
      best = g(s);
      arg = s;
    }
  }
  double lo = std::max(arg - t / samples, 1e-300), hi = std::min(arg + t / samples, t);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
    (g(m1) < g(m2) ? lo : hi) = g(m1) < g(m2) ? m1 : m2;
  }
  return std::max(best, g(0.5 * (lo + hi)));
}

double integral_oracle(double a, double b, double A, double B) {
  auto f = [&](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return std::exp(-a * std::log(1 - x) - b * std::log(x) - A * A / (4 * (1 - x)) - B * B / (4 * x) +
                    0.25 * (A + B) * (A + B));
  };
  const double lhs = testsupport::simpson(f, 0.0, 1.0, 200000);
  return lhs / (std::pow(A, 1 - a) * std::pow(B, 1 - b) * std::pow(A + B, a + b - 2));
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("parcap_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("kernel maximum: closed form against a dense one-dimensional search") {
  Rng rng(1001);
  for (int i = 0; i < 40; ++i) {
    const int N = rng.integer(1, 6);
    const double a = rng.uniform(0.2, 30.0), b = a + rng.uniform(0.5, 10.0), t = rng.uniform(0.01, 5.0);
    CHECK(testsupport::rel(kernel_max_closed_form(a, b, t, N), kernel_max_oracle(a, t, N, 100000)) < 1e-9);
  }
}

TEST_CASE("kernel maximum: branches and the built-in grid search") {
  auto k1 = kernel_max(10.0, 20.0, 1.0, 1);
  CHECK(k1.branch == 1);
  CHECK(k1.sigma == 1.0);
  CHECK(k1.relative_gap() < 5e-3);
  auto k2 = kernel_max(1.0, 4.0, 1.0, 3);
  CHECK(k2.branch == 2);
  CHECK(k2.sigma == doctest::Approx(1.0 / 6.0));
  CHECK(k2.relative_gap() < 5e-3);
  CHECK(code_of([] { kernel_max_closed_form(2.0, 1.0, 1.0, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("property: the variant bound dominates the kernel maximum") {
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    const int N = rng.integer(1, 6);
    const double a = rng.uniform(0.1, 40.0), t = rng.uniform(0.01, 5.0);
    const double theta = std::max(1.0 / (2.0 * N), 1.0 / a) * rng.uniform(1.0, 3.0);
    CHECK(kernel_max_closed_form(a, a + 1.0, t, N) <= kernel_max_variant_bound(a, t, N, theta) * (1 + 1e-12));
  }
  CHECK(code_of([] { kernel_max_variant_bound(0.5, 1.0, 1, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sharp integral ratio against composite Simpson") {
  Rng rng(5150);
  for (int i = 0; i < 30; ++i) {
    const double a = rng.uniform(0.1, 3.0), b = rng.uniform(0.1, 3.0);
    const double A = rng.uniform(0.5, 6.0), B = rng.uniform(1.0 / A + 0.1, 6.0);
    CHECK(testsupport::rel(sharp_integral_ratio(a, b, A, B, 1.0), integral_oracle(a, b, A, B)) < 1e-6);
  }
  CHECK(code_of([] { sharp_integral_ratio(1.0, 1.0, 0.5, 1.0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("integral sweep: size, finite sup, refinement and symmetry") {
  auto sw = IntegralSweep::default_sweep();
  CHECK(sw.tuples.size() >= 200);
  for (const auto& t : sw.tuples) CHECK(t.A * t.B > sw.kappa);
  auto rep = integral_sweep_report(sw);
  CHECK(rep.pass);
  CHECK(std::isfinite(rep.max_ratio));
  CHECK(rep.refinement_change < 0.05);
  CHECK(integral_symmetry_defect(sw) < 1e-6);

  auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j.at("rows").size() == sw.tuples.size());
  CHECK(j.at("pass").get<bool>());
  std::ostringstream os;
  rep.write_csv(os);
  CHECK(os.str().rfind("a,b,A,B,ratio,ratio_refined\n", 0) == 0);
}

TEST_CASE("sweep files: round trip and schema errors") {
  auto sw = IntegralSweep::default_sweep();
  const auto p = temp_path("sweep.json");
  sw.save(p);
  auto back = IntegralSweep::load(p);
  CHECK(back.version == sw.version);
  CHECK(back.tuples.size() == sw.tuples.size());
  CHECK(back.tuples[17].B == sw.tuples[17].B);

  write_file(p, "{ not json");
  CHECK(code_of([&] { IntegralSweep::load(p); }) == ErrorCode::SchemaMismatch);
  write_file(p, R"({"version": 1, "kappa": 1.0})");
  CHECK(code_of([&] { IntegralSweep::load(p); }) == ErrorCode::SchemaMismatch);
  write_file(p, R"({"version": 1, "kappa": 1.0, "tuples": [[1, 2, 3]]})");
  CHECK(code_of([&] { IntegralSweep::load(p); }) == ErrorCode::SchemaMismatch);
  write_file(p, R"({"version": 1, "kappa": 1.0, "tuples": []})");
  CHECK(code_of([&] { IntegralSweep::load(p); }) == ErrorCode::SchemaMismatch);
  std::remove(p.c_str());
}

TEST_CASE("series bound: direct summation and a bounded ratio in n") {
  const double alpha = 0.5, beta = 1.0, gamma = 2.0, delta = 0.25;
  const int ell = 2;
  for (int n : {5, 40, 300}) {
    long double sum = 0.0L;
    for (int p = 1; p <= n - ell; ++p) {
      const long double z = std::sqrt((long double)p) + std::sqrt((long double)gamma) *
                                                            (std::sqrt((long double)n) - std::sqrt((long double)p + 1));
      sum += std::pow((long double)p, (long double)alpha) *
             std::pow(std::sqrt((long double)n) - std::sqrt((long double)p), (long double)beta) *
             std::exp(-(long double)delta * z * z + (long double)delta * n);
    }
    const double expect = static_cast<double>(sum / std::pow((long double)n, (long double)(alpha - 0.5 * beta)));
    CHECK(testsupport::rel(series_bound_ratio(alpha, beta, gamma, delta, ell, n), expect) < 1e-12);
  }
  // The ratio grows for small n and saturates; the bound only needs the sup to be finite.
  auto rep = series_bound_report(alpha, beta, gamma, delta, ell, {64, 256, 1024, 4096, 16384});
  CHECK(rep.pass);
  CHECK(rep.rows.size() == 5);
  CHECK(testsupport::rel(rep.rows[4].ratio, rep.rows[3].ratio) < 0.02);
  CHECK_FALSE(series_bound_report(alpha, beta, gamma, delta, ell, {4, 4096}).pass);
  CHECK(code_of([] { series_bound_ratio(0.5, 1.0, 1.0, 0.25, 2, 10); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { series_bound_ratio(0.5, 1.0, 2.0, 0.25, 2, 2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("report finalize picks the argmax and flags instability") {
  InequalityReport r;
  r.parameter_names = {"p"};
  r.rows = {{{2.0}, 1.0, 1.0}, {{1.0}, 3.0, 3.3}, {{3.0}, 2.0, 2.0}};
  r.finalize();
  CHECK(r.rows.front().parameters[0] == 1.0);
  CHECK(r.max_ratio == 3.0);
  CHECK(r.argmax == std::vector<double>{1.0});
  CHECK(r.refinement_change == doctest::Approx(0.1));
  CHECK_FALSE(r.pass);
  r.rows[0].ratio_refined = std::nan("");
  r.finalize();
  CHECK_FALSE(r.pass);
}
