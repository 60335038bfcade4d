#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "parcap/capacity.hpp"
#include "parcap/error.hpp"
#include "support.hpp"

using namespace parcap;

namespace {

CapacityOptions fixed(double h, bool refine = false) {
  CapacityOptions o;
  o.h = h;
  o.refine_bracket = refine;
  return o;
}

double cap(const ClosedSet& K, const ProblemParams& P, double h) {
  return capacity_numeric(CapacityProblem::make(K, P, fixed(h))).value;
}

// Dense Cholesky solve of the SPD system M x = b (in place).
std::vector<double> spd_solve(std::vector<double> M, std::vector<double> b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = M[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= M[j * n + k] * M[j * n + k];
    d = std::sqrt(d);
    M[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = M[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= M[i * n + k] * M[j * n + k];
      M[i * n + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= M[i * n + k] * b[k];
    b[i] /= M[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= M[k * n + i] * b[k];
    b[i] /= M[i * n + i];
  }
  return b;
}

struct DenseOracle {
  double value = 0.0;
  double min_multiplier = 0.0;
};

// Independent 1-D solver: builds the Bessel multiplier as a dense circulant
// by direct cosine sums and minimizes h Σ |Λ^s η|^p subject to η >= 1 on K.
// Inner problem: damped Newton on a smoothed objective with the pinned nodes
// held at 1; outer loop: primal active set on the K nodes.
DenseOracle dense_capacity(const CapacityProblem& prob, const std::vector<std::size_t>& knodes) {
  const std::size_t n = prob.grid.n[0];
  const double h = prob.grid.h, L = h * n, s = prob.s, p = prob.p;
  std::vector<double> c(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = k <= n / 2 ? double(k) : double(k) - double(n);
    const double xi = 2 * std::numbers::pi * kk / L;
    const double sig = std::pow(1 + xi * xi, 0.5 * s);
    for (std::size_t m = 0; m < n; ++m) c[m] += sig * std::cos(2 * std::numbers::pi * double(k * m % n) / n) / n;
  }
  auto A = [&](std::size_t i, std::size_t j) { return c[(i + n - j) % n]; };
  auto apply = [&](const std::vector<double>& e) {
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) v[i] += A(i, j) * e[j];
    return v;
  };
  auto cost = [&](const std::vector<double>& e, double d) {
    double f = 0.0;
    for (double v : apply(e)) f += std::pow(v * v + d * d, 0.5 * p);
    return h * f;
  };
  auto gradient_at = [&](const std::vector<double>& e, std::size_t k) {
    auto v = apply(e);
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      g += h * A(i, k) * p * (v[i] >= 0 ? 1 : -1) * std::pow(std::abs(v[i]), p - 1);
    return g;
  };

  std::vector<char> pinned(n, 0);
  for (auto k : knodes) pinned[k] = 1;
  std::vector<double> eta(n, 0.0);
  for (auto k : knodes) eta[k] = 1.0;

  auto solve_free = [&]() {
    std::vector<std::size_t> freev;
    for (std::size_t i = 0; i < n; ++i)
      if (!pinned[i]) freev.push_back(i);
    const std::size_t m = freev.size();
    for (double d = 1e-1; d >= 1e-9; d *= 0.1) {
      for (int it = 0; it < 60; ++it) {
        auto v = apply(eta);
        std::vector<double> w1(n), w2(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double r = v[i] * v[i] + d * d;
          w1[i] = p * v[i] * std::pow(r, 0.5 * p - 1);
          w2[i] = p * std::pow(r, 0.5 * p - 2) * ((p - 1) * v[i] * v[i] + d * d);
        }
        std::vector<double> g(m, 0.0), H(m * m, 0.0);
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t i = 0; i < n; ++i) g[a] += h * A(i, freev[a]) * w1[i];
          for (std::size_t b = 0; b <= a; ++b) {
            double s2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) s2 += A(i, freev[a]) * w2[i] * A(i, freev[b]);
            H[a * m + b] = H[b * m + a] = h * s2;
          }
        }
        double gn = 0.0;
        for (double x : g) gn = std::max(gn, std::abs(x));
        if (gn < 1e-13) break;
        auto step = spd_solve(H, g, m);
        const double f0 = cost(eta, d);
        double t = 1.0;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
          auto trial = eta;
          for (std::size_t a = 0; a < m; ++a) trial[freev[a]] -= t * step[a];
          if (cost(trial, d) <= f0) {
            eta = trial;
            break;
          }
        }
      }
    }
  };

  DenseOracle out;
  for (int round = 0; round < 20; ++round) {
    solve_free();
    bool changed = false;
    for (auto k : knodes) {
      if (!pinned[k] && eta[k] < 1.0) {
        pinned[k] = 1;
        eta[k] = 1.0;
        changed = true;
      }
    }
    if (changed) continue;
    out.min_multiplier = INFINITY;
    std::size_t worst = n;
    for (auto k : knodes) {
      if (!pinned[k]) continue;
      const double g = gradient_at(eta, k);
      if (g < out.min_multiplier) {
        out.min_multiplier = g;
        worst = k;
      }
    }
    if (out.min_multiplier >= -1e-10 || worst == n) break;
    pinned[worst] = 0;  // release the most violated constraint
  }
  out.value = cost(eta, 0.0);
  return out;
}

}  // namespace

TEST_CASE("dual solver matches an independent dense Newton solve") {
  for (double q : {2.0, 4.0}) {
    auto P = ProblemParams::make(1, q);
    CapacityOptions o = fixed(0.05);
    o.margin = 0.6;
    auto prob = CapacityProblem::make(ClosedSet::interval(-0.1, 0.1), P, o);
    auto sol = solve_capacity_dual(prob);
    auto ref = dense_capacity(prob, sol.nodes);
    CHECK(ref.min_multiplier >= -1e-10);  // KKT for the pinned nodes
    CHECK(testsupport::rel(sol.value, ref.value) < 1e-5);
    CHECK(testsupport::rel(solve_capacity_primal(prob).value, ref.value) < 1e-4);
  }
}

TEST_CASE("empty set has zero capacity and zero measure") {
  auto P = ProblemParams::make(1, 4.0);
  auto prob = CapacityProblem::make(ClosedSet::empty(1), P, fixed(0.02));
  CHECK(capacity_numeric(prob).value == 0.0);
  CHECK(capacitary_measure(prob).total_mass() == 0.0);
}

TEST_CASE("bracket contains the value") {
  auto P = ProblemParams::make(1, 4.0);
  auto e = capacity_numeric(CapacityProblem::make(ClosedSet::interval(-1, 1), P, fixed(0.01, true)));
  CHECK(0.0 <= e.bracket_lo);
  CHECK(e.bracket_lo <= e.value);
  CHECK(e.value <= e.bracket_hi);
}

TEST_CASE("monotone under inclusion, nested intervals") {
  auto P = ProblemParams::make(1, 4.0);
  double prev = 0.0;
  for (double a : {0.1, 0.25, 0.5, 1.0, 1.5}) {
    const double c = cap(ClosedSet::interval(-a, a), P, 0.01);
    CHECK(prev <= c * (1 + 1e-6));
    prev = c;
  }
}

TEST_CASE("union of separated intervals: max <= C(union) <= sum") {
  auto P = ProblemParams::make(1, 4.0);
  auto K1 = ClosedSet::interval(-1.5, -0.5), K2 = ClosedSet::interval(0.5, 1.5);
  const double c1 = cap(K1, P, 0.01), c2 = cap(K2, P, 0.01);
  const double cu = cap(ClosedSet::unite({K1, K2}), P, 0.01);
  CHECK(cu >= std::max(c1, c2) * (1 - 1e-6));
  CHECK(cu <= (c1 + c2) * (1 + 1e-6));
}

TEST_CASE("capacitary measure: symmetric, mass equals capacity") {
  auto P = ProblemParams::make(1, 4.0);
  auto prob = CapacityProblem::make(ClosedSet::interval(-1, 1), P, fixed(0.01));
  auto mu = capacitary_measure(prob);
  const double c = capacity_numeric(prob).value;
  double left = 0.0, right = 0.0;
  for (const auto& a : mu.atoms) {
    CHECK(a.mass >= 0.0);
    (a.location[0] < 0 ? left : right) += a.mass;
  }
  CHECK(std::abs(left - right) <= 0.01 * (left + right));
  CHECK(std::abs(mu.total_mass() / c - 1.0) <= 0.05);
}

TEST_CASE("quasi-additivity ratio") {
  auto P = ProblemParams::make(1, 4.0);
  auto o = fixed(0.01);
  CHECK(quasi_additivity_ratio({ClosedSet::interval(-0.5, 0.5)}, P, o) == 1.0);
  const double r = quasi_additivity_ratio({ClosedSet::interval(-2.5, -1.5), ClosedSet::interval(1.5, 2.5)}, P, o);
  CHECK(r >= 1 - 1e-6);
  CHECK(std::isfinite(r));
  try {
    quasi_additivity_ratio({ClosedSet::interval(-1, 0.2), ClosedSet::interval(0, 1)}, P, o);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PiecesOverlap);
  }
}

TEST_CASE("closed form: points vanish, balls scale exactly") {
  CalibrationCache cache(std::nullopt);
  auto P = ProblemParams::make(1, 4.0);
  CHECK(capacity_closed_form(ClosedSet::point({0.3}), P, cache).value == 0.0);
  const double c1 = capacity_closed_form(ClosedSet::ball({0.0}, 1.0), P, cache).value;
  const double c2 = capacity_closed_form(ClosedSet::ball({0.0}, 2.0), P, cache).value;
  CHECK(c2 / c1 == doctest::Approx(std::pow(2.0, 1.0 / 3.0)).epsilon(1e-14));
  // calibration constant is the numeric capacity of the unit ball
  CHECK(c1 == doctest::Approx(capacity_numeric(CapacityProblem::make(ClosedSet::interval(-1, 1), P)).value)
                  .epsilon(1e-12));
  try {
    capacity_closed_form(ClosedSet::interval(0, 0.5).translated({0.1}), P, cache);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoClosedForm);
  }
  CHECK_THROWS_AS(capacity_closed_form(ClosedSet::cantor(0, 1, 0.3, 2), P, cache), Error);
  CHECK_THROWS_AS(capacity_closed_form(ClosedSet::ball({0.0}, 1.0), ProblemParams::make(1, 2.0), cache), Error);
}

TEST_CASE("calibration cache persists to its JSON file") {
  auto path = std::filesystem::temp_directory_path() / "parcap_test_cache.json";
  std::filesystem::remove(path);
  {
    CalibrationCache c(path.string());
    c.store(ProblemParams::make(2, 3.0), 1.25);
  }
  CalibrationCache again(path.string());
  REQUIRE(again.lookup(ProblemParams::make(2, 3.0)).has_value());
  CHECK(*again.lookup(ProblemParams::make(2, 3.0)) == 1.25);
  CHECK_FALSE(again.lookup(ProblemParams::make(2, 4.0)).has_value());
  std::filesystem::remove(path);
}

TEST_CASE("grid convergence on the unit interval") {
  auto P = ProblemParams::make(1, 4.0);
  auto K = ClosedSet::interval(-1, 1);
  const double c1 = cap(K, P, 0.04), c2 = cap(K, P, 0.02), c3 = cap(K, P, 0.01);
  CHECK(std::abs(c2 - c3) < std::abs(c1 - c2));
}

TEST_CASE("single points: null when q >= qc, positive limit below") {
  auto super = ProblemParams::make(1, 4.0);
  auto sub = ProblemParams::make(1, 2.0);
  auto K = ClosedSet::point({0.0});
  const double a1 = cap(K, super, 0.04), a2 = cap(K, super, 0.02), a3 = cap(K, super, 0.01);
  CHECK(a2 < a1);
  CHECK(a3 < a2);
  const double b2 = cap(K, sub, 0.02), b3 = cap(K, sub, 0.01);
  CHECK(b3 > 0.5 * b2);
  CHECK(std::abs(b3 - b2) / b3 < std::abs(a3 - a2) / a3);
}

TEST_CASE("scaling of small balls approaches the homogeneous exponent") {
  // The Bessel kernel behaves like the Riesz kernel at small scales, where
  // capacity is homogeneous of degree N - 2/(q-1); at unit scale it is not.
  auto P = ProblemParams::make(1, 4.0);
  auto ratio = [&](double r) {
    CapacityOptions o = fixed(r / 50);
    o.margin = 6.0;
    const double a = capacity_numeric(CapacityProblem::make(ClosedSet::interval(-r, r), P, o)).value;
    o.h = 2 * r / 50;
    const double b = capacity_numeric(CapacityProblem::make(ClosedSet::interval(-2 * r, 2 * r), P, o)).value;
    return b / a;
  };
  const double target = std::pow(2.0, 1.0 / 3.0);
  const double small = ratio(0.02), unit = ratio(1.0);
  MESSAGE("ratio at r=0.02: " << small << ", at r=1: " << unit << ", homogeneous: " << target);
  CHECK(std::abs(small / target - 1) < std::abs(unit / target - 1));
  CHECK(std::abs(small / target - 1) < 0.10);
}

TEST_CASE("local capacity: decreasing in rho, near global for large rho") {
  auto P = ProblemParams::make(1, 4.0);
  auto K = ClosedSet::interval(-0.5, 0.5);
  auto o = fixed(0.02);
  double prev = INFINITY;
  for (double rho : {0.125, 0.5, 2.0, 4.0}) {
    auto lg = local_vs_global_capacity(K, 0.5, rho, P, o);
    CHECK(lg.ratio() >= 1 - 1e-6);
    CHECK(lg.ratio() <= prev * (1 + 1e-6));
    prev = lg.ratio();
    if (rho >= 2.0) CHECK(std::abs(lg.ratio() - 1) < 0.10);
  }
}

TEST_CASE("backend caches by similarity class") {
  auto P = ProblemParams::make(1, 4.0);
  NumericCapacityBackend b(P, fixed(0.02));
  const double c1 = b.capacity(ClosedSet::interval(0, 0.5));
  const double c2 = b.capacity(ClosedSet::interval(3, 3.5));
  const double c3 = b.capacity(ClosedSet::interval(-0.5, 0));
  CHECK(c1 == c2);
  CHECK(c1 == c3);
  CHECK(b.solves() == 1);
  CHECK_THROWS_AS(b.capacity(ClosedSet::full_space(1)), Error);
}
