#include <cmath>
#include <numbers>

#include "doctest.h"
#include "parcap/error.hpp"
#include "parcap/heat.hpp"
#include "parcap/quadrature.hpp"
#include "support.hpp"

using namespace parcap;
using testsupport::Rng;
using testsupport::simpson;

namespace {

constexpr double pi = std::numbers::pi;

GridFunction gaussian_density(double M, double a, double L, double h) {
  auto g = UniformGrid::covering({-L}, {L}, h);
  GridFunction f(g, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = g.node(i)[0];
    f.values[i] = M * std::exp(-a * y * y);
  }
  return f;
}

}  // namespace

TEST_CASE("kernel: normalisation point, symmetry, time check") {
  CHECK(heat_kernel({0.3}, {0.3}, 1.0 / (4.0 * pi)) == doctest::Approx(1.0).epsilon(1e-14));
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const int N = rng.integer(1, 3);
    Point x(N), y(N);
    for (int k = 0; k < N; ++k) {
      x[k] = rng.uniform(-3, 3);
      y[k] = rng.uniform(-3, 3);
    }
    const double t = rng.uniform(0.01, 2.0);
    CHECK(heat_kernel(x, y, t) == heat_kernel(y, x, t));
    CHECK(heat_kernel(x, y, t) > 0.0);
  }
  try {
    heat_kernel({0.0}, {0.0}, 0.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonpositiveTime);
  }
}

TEST_CASE("kernel integrates to one") {
  const double m = simpson([](double y) { return heat_kernel({0.0}, {y}, 1.0); }, -20.0, 20.0, 4000);
  CHECK(std::abs(m - 1.0) < 1e-10);
}

TEST_CASE("property: Chapman-Kolmogorov on N=1 samples") {
  Rng rng(17);
  for (int i = 0; i < 25; ++i) {
    const double x = rng.uniform(-2, 2), y = rng.uniform(-2, 2);
    const double t = rng.uniform(0.05, 1.0), s = rng.uniform(0.05, 1.0);
    const double L = 12.0 + std::abs(x) + std::abs(y);
    const double lhs =
        simpson([&](double z) { return heat_kernel({x}, {z}, t) * heat_kernel({z}, {y}, s); }, -L, L, 20000);
    CHECK(testsupport::rel(lhs, heat_kernel({x}, {y}, t + s)) < 1e-8);
  }
}

TEST_CASE("heat potential of a Dirac mass is the kernel") {
  auto mu = RadonMeasure::dirac({0.2}, 1.0);
  CHECK(heat_potential(mu, {0.7}, 0.3) == doctest::Approx(heat_kernel({0.7}, {0.2}, 0.3)).epsilon(1e-14));
}

TEST_CASE("heat potential of a wide unit density is close to one") {
  RadonMeasure mu;
  auto g = UniformGrid::covering({-30.0}, {30.0}, 0.05);
  mu.density = GridFunction(g, 1.0);
  for (double x : {-1.0, 0.0, 2.5})
    CHECK(std::abs(heat_potential(mu, {x}, 1.0) - 1.0) < 1e-10);
}

TEST_CASE("Gaussian density: potential equals the decay bound (equality case)") {
  Rng rng(99);
  for (int i = 0; i < 50; ++i) {
    const double M = rng.uniform(0.1, 5.0), a = rng.uniform(0.5, 4.0);
    const double x = rng.uniform(-1.5, 1.5), t = rng.uniform(0.01, 0.5);
    const double exact = M / std::sqrt(4 * a * t + 1) * std::exp(-a * x * x / (4 * a * t + 1));
    const double b = gaussian_decay_bound(M, a, 0.0, {x}, t);
    CHECK(testsupport::rel(b, exact) < 1e-13);
    const double h = heat_potential_1d([&](double y) { return M * std::exp(-a * y * y); }, x, t);
    CHECK(testsupport::rel(h / b, 1.0) < 1e-8);
  }
}

TEST_CASE("decay bound limits and shift") {
  CHECK(gaussian_decay_bound(2.0, 1.5, 0.5, {1.5}, 1e-14) == doctest::Approx(2.0 * std::exp(-1.5)).epsilon(1e-10));
  CHECK(gaussian_decay_bound(2.0, 1.5, 2.0, {1.5}, 1e-14) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(gaussian_decay_bound(-1.0, 1.0, 0.0, {0.0}, 1.0), Error);
  CHECK_THROWS_AS(gaussian_decay_bound(1.0, 0.0, 0.0, {0.0}, 1.0), Error);
}

TEST_CASE("property: sub-Gaussian data stays below the bound") {
  Rng rng(123);
  for (int i = 0; i < 50; ++i) {
    const double M = rng.uniform(0.5, 3.0), a = rng.uniform(0.5, 3.0);
    const double w = rng.uniform(0.5, 6.0), ph = rng.uniform(0, 2 * pi);
    auto eta = [&](double y) { return M * std::exp(-a * y * y) * (0.5 + 0.5 * std::sin(w * y + ph)); };
    for (double x : {-1.0, 0.0, 0.7}) {
      const double t = rng.uniform(0.01, 1.0);
      CHECK(heat_potential_1d(eta, x, t) <= gaussian_decay_bound(M, a, 0.0, {x}, t) * (1 + 1e-8));
    }
  }
}

TEST_CASE("heat potential is monotone in the measure") {
  Rng rng(8);
  auto g1 = gaussian_density(1.0, 2.0, 6.0, 0.02);
  auto g2 = g1;
  for (auto& v : g2.values) v *= 1.0 + rng.uniform();
  RadonMeasure m1, m2;
  m1.density = g1;
  m2.density = g2;
  m1.atoms.push_back({{0.3}, 0.5});
  m2.atoms.push_back({{0.3}, 0.8});
  for (int i = 0; i < 40; ++i) {
    const double x = rng.uniform(-3, 3), t = rng.uniform(0.01, 1.0);
    CHECK(heat_potential(m1, {x}, t) <= heat_potential(m2, {x}, t));
  }
}

TEST_CASE("Green potential: zero, constant, and a Gaussian source") {
  auto g = UniformGrid::covering({-25.0}, {25.0}, 0.05);
  const double t = 0.4;
  const int slices = 41;
  std::vector<GridFunction> zero, one, gauss;
  auto gd = gaussian_density(1.0, 1.0, 25.0, 0.05);
  for (int j = 0; j < slices; ++j) {
    const double s = t * j / (slices - 1);
    zero.emplace_back(g, std::vector<double>(g.size(), 0.0), s);
    one.emplace_back(g, std::vector<double>(g.size(), 1.0), s);
    gauss.emplace_back(g, gd.values, s);
  }
  CHECK(green_potential(zero, {0.0}, t) == 0.0);
  CHECK(green_potential(one, {0.3}, t) == doctest::Approx(t).epsilon(1e-6));

  // Duhamel with a time-constant Gaussian source: ∫_0^t (4τ+1)^{-1/2} e^{-x^2/(4τ+1)} dτ
  for (double x : {0.0, 0.8}) {
    const double exact =
        simpson([&](double tau) { return std::exp(-x * x / (4 * tau + 1)) / std::sqrt(4 * tau + 1); }, 0.0, t, 2000);
    CHECK(testsupport::rel(green_potential(gauss, {x}, t), exact) < 1e-3);
  }

  std::vector<GridFunction> gap(one.begin(), one.begin() + 10);
  try {
    green_potential(gap, {0.0}, t);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompleteHistory);
  }
}

TEST_CASE("spherical integrals: closed forms") {
  CHECK(spherical_integral(2, 0.0) == doctest::Approx(pi).epsilon(1e-12));
  CHECK(spherical_integral(3, 2.0) == doctest::Approx(std::sinh(2.0)).epsilon(1e-12));
  for (double m : {0.1, 1.0, 5.0, 20.0}) {
    CHECK(testsupport::rel(spherical_integral(3, m), 2 * std::sinh(m) / m) < 1e-9);
    // ∫ e^{m cos θ} sin^3 θ dθ = 4 cosh m / m^2 - 4 sinh m / m^3
    const double i5 = 4 * std::cosh(m) / (m * m) - 4 * std::sinh(m) / (m * m * m);
    CHECK(testsupport::rel(spherical_integral(5, m), i5) < (m < 1 ? 1e-6 : 1e-9));
  }
  // N=2 is the modified Bessel function π I_0(m), here by Simpson.
  const double i2 = simpson([](double th) { return std::exp(3.0 * std::cos(th)); }, 0.0, pi, 2000);
  CHECK(testsupport::rel(spherical_integral(2, 3.0), i2) < 1e-10);
}

TEST_CASE("spherical integrals: integration by parts recursion") {
  for (int N : {6, 7, 8}) {
    for (double m : {0.5, 5.0, 20.0, 80.0}) {
      const double lhs = spherical_integral(N, m);
      CHECK(testsupport::rel(spherical_recursion(N, m), lhs) < 1e-9);
    }
  }
}

TEST_CASE("spherical integrals: factored recursion is off by a computable amount") {
  // With N=6: factored RHS = (3/m^2)(𝓘_2 - 𝓘_4), exact RHS = (3/m^2)(𝓘_2 - 2𝓘_4).
  const double m = 5.0;
  const double diff = spherical_recursion_factored(6, m) - spherical_recursion(6, m);
  CHECK(testsupport::rel(diff, 3.0 / (m * m) * spherical_integral(4, m)) < 1e-9);
}

TEST_CASE("property: spherical envelope flattens at large m") {
  for (int N = 2; N <= 7; ++N) {
    double sup = 0.0;
    for (double m = 0.0; m <= 200.0; m += 0.5) sup = std::max(sup, spherical_envelope_ratio(N, m));
    CHECK(std::isfinite(sup));
    const double at200 = spherical_envelope_ratio(N, 200.0);
    for (double m = 100.0; m <= 200.0; m += 10.0)
      CHECK(std::abs(spherical_envelope_ratio(N, m) / at200 - 1.0) < 0.05);
  }
}

TEST_CASE("quadrature wrappers") {
  auto r = integrate([](double x) { return std::exp(-x * x); }, -10, 10, 1e-14, 1e-12);
  CHECK(r.value == doctest::Approx(std::sqrt(pi)).epsilon(1e-12));
  auto s = integrate_singular([](double x) { return 1.0 / std::sqrt(x); }, 0, 1, 1e-12, 1e-10);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-9));
  auto u = integrate_upper([](double x) { return std::exp(-x); }, 1.0, 1e-14, 1e-12);
  CHECK(u.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-11));
  double sum = 0.0;
  for (auto [x, w] : gauss_legendre(8, 0.0, 2.0)) sum += w * x * x * x * x * x * x * x;  // exact for degree 15
  CHECK(sum == doctest::Approx(32.0).epsilon(1e-13));
}
