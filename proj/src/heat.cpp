#include "parcap/heat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parcap/error.hpp"
#include "parcap/quadrature.hpp"

namespace parcap {

namespace {

constexpr double kPi = std::numbers::pi;

void check_time(double t) {
  require(t > 0.0 && std::isfinite(t), ErrorCode::NonpositiveTime, "time must be positive");
}

// P(v0 < V < v1) for V ~ N(0, σ²), written to avoid cancellation in the tails.
double normal_mass(double v0, double v1, double sigma) {
  const double s = 1.0 / (sigma * std::numbers::sqrt2);
  if (v0 >= 0.0) return 0.5 * (std::erfc(v0 * s) - std::erfc(v1 * s));
  if (v1 <= 0.0) return 0.5 * (std::erfc(-v1 * s) - std::erfc(-v0 * s));
  return 0.5 * (std::erf(v1 * s) - std::erf(v0 * s));
}

double normal_pdf(double v, double sigma) {
  return std::exp(-0.5 * v * v / (sigma * sigma)) / (sigma * std::sqrt(2.0 * kPi));
}

// ∫_{v0}^{v1} (c + slope·v) g(v) dv with g the N(0, σ²) density.
double linear_gauss(double v0, double v1, double c, double slope, double sigma) {
  double dA = normal_mass(v0, v1, sigma);
  double dB = -sigma * sigma * (normal_pdf(v1, sigma) - normal_pdf(v0, sigma));
  return c * dA + slope * dB;
}

// Weights ∫ φ_j(y) g(x - y) dy for the hat functions of one grid axis.
std::vector<double> hat_weights(double lo, double h, int n, double x, double t) {
  const double sigma = std::sqrt(2.0 * t);
  const double reach = 40.0 * sigma + h;
  std::vector<double> w(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double c = lo + h * j;
    if (std::abs(c - x) > reach) continue;
    // v = y - x
    double left = linear_gauss(c - h - x, c - x, (x - c + h) / h, 1.0 / h, sigma);
    double right = linear_gauss(c - x, c + h - x, (c + h - x) / h, -1.0 / h, sigma);
    w[j] = std::max(0.0, left + right);
  }
  return w;
}

}  // namespace

double heat_kernel(const Point& x, const Point& y, double t) {
  check_time(t);
  double r2 = 0.0;
  require(x.size() == y.size(), ErrorCode::InvalidArgument, "dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
  return std::pow(4.0 * kPi * t, -0.5 * static_cast<double>(x.size())) * std::exp(-r2 / (4.0 * t));
}

double heat_potential(const RadonMeasure& mu, const Point& x, double t) {
  check_time(t);
  double acc = 0.0;
  for (const auto& a : mu.atoms) acc += a.mass * heat_kernel(x, a.location, t);
  if (mu.density) {
    const auto& g = mu.density->grid;
    require(static_cast<int>(x.size()) == g.dim(), ErrorCode::InvalidArgument, "point has wrong dimension");
    std::vector<std::vector<double>> w(g.dim());
    for (int a = 0; a < g.dim(); ++a) w[a] = hat_weights(g.lo[a], g.h, g.n[a], x[a], t);
    const auto& v = mu.density->values;
    if (g.dim() == 1) {
      for (int j = 0; j < g.n[0]; ++j) acc += w[0][j] * v[j];
    } else {
      for (std::size_t f = 0; f < g.size(); ++f) {
        auto idx = g.multi_index(f);
        double wt = 1.0;
        for (int a = 0; a < g.dim() && wt != 0.0; ++a) wt *= w[a][idx[a]];
        acc += wt * v[f];
      }
    }
  }
  return acc;
}

double heat_potential_1d(const std::function<double(double)>& density, double x, double t) {
  check_time(t);
  const double sigma = std::sqrt(2.0 * t);
  // Gaussian factor below 1e-16 of its peak beyond |v| = sqrt(2 ln 1e16) σ.
  const double cut = std::sqrt(2.0 * std::log(1e16)) * sigma;
  auto f = [&](double y) { return density(y) * normal_pdf(y - x, sigma); };
  return integrate_breaks(f, {x - cut, x, x + cut}, 1e-14, 1e-12).value;
}

double green_potential(const std::vector<GridFunction>& f, const Point& x, double t) {
  check_time(t);
  std::vector<const GridFunction*> slices;
  for (const auto& g : f) {
    require(g.time.has_value(), ErrorCode::IncompleteHistory, "slice without a time stamp");
    if (*g.time <= t * (1.0 + 1e-12)) slices.push_back(&g);
  }
  std::sort(slices.begin(), slices.end(), [](auto* a, auto* b) { return *a->time < *b->time; });
  require(slices.size() >= 2, ErrorCode::IncompleteHistory, "need at least two slices on [0, t]");
  require(std::abs(*slices.front()->time) <= 1e-12 * t, ErrorCode::IncompleteHistory, "history does not start at 0");
  require(std::abs(*slices.back()->time - t) <= 1e-9 * t, ErrorCode::IncompleteHistory, "history does not reach t");
  const double dt = t / static_cast<double>(slices.size() - 1);
  for (std::size_t k = 0; k < slices.size(); ++k)
    require(std::abs(*slices[k]->time - dt * k) <= 1e-6 * dt, ErrorCode::IncompleteHistory,
            "slices are not uniformly spaced in time");
  double acc = 0.0;
  for (std::size_t k = 0; k < slices.size(); ++k) {
    double s = *slices[k]->time;
    double wk = (k == 0 || k + 1 == slices.size()) ? 0.5 * dt : dt;
    double val;
    if (k + 1 == slices.size()) {
      val = interpolate(*slices[k], x);
    } else {
      RadonMeasure m;
      m.density = *slices[k];
      val = heat_potential(m, x, t - s);
    }
    acc += wk * val;
  }
  return acc;
}

double gaussian_decay_bound(double M, double a, double b, const Point& x, double t) {
  require(M > 0.0 && a > 0.0, ErrorCode::InvalidArgument, "decay bound needs M, a > 0");
  require(b >= 0.0, ErrorCode::InvalidArgument, "decay bound needs b >= 0");
  check_time(t);
  const double den = 4.0 * a * t + 1.0;
  const double r = std::max(0.0, norm(x) - b);
  return M * std::pow(den, -0.5 * static_cast<double>(x.size())) * std::exp(-a * r * r / den);
}

double spherical_integral_scaled(int N, double m) {
  require(N >= 2, ErrorCode::InvalidArgument, "spherical integral needs N >= 2");
  require(m >= 0.0 && std::isfinite(m), ErrorCode::InvalidArgument, "spherical integral needs m >= 0");
  const int k = N - 2;
  auto f = [m, k](double th) {
    double s = std::sin(th);
    return std::exp(m * (std::cos(th) - 1.0)) * (k == 0 ? 1.0 : std::pow(s, k));
  };
  std::vector<double> pts{0.0};
  if (m > 1.0) {
    double w = 8.0 / std::sqrt(m);
    if (w < kPi) pts.push_back(w);
    if (0.25 * w < kPi) pts.insert(pts.begin() + 1, 0.25 * w);
  }
  pts.push_back(kPi);
  return integrate_breaks(f, pts, 0.0, 1e-13).value;
}

double spherical_integral(int N, double m) { return std::exp(m) * spherical_integral_scaled(N, m); }

double spherical_envelope_ratio(int N, double m) {
  return spherical_integral_scaled(N, m) * std::pow(1.0 + m, 0.5 * (N - 1));
}

double spherical_recursion_factored(int N, double m) {
  require(N >= 6, ErrorCode::InvalidArgument, "recursion needs N >= 6");
  require(m > 0.0, ErrorCode::InvalidArgument, "recursion needs m > 0");
  return (N - 3.0) * (N - 5.0) / (m * m) * (spherical_integral(N - 4, m) - spherical_integral(N - 2, m));
}

double spherical_recursion(int N, double m) {
  require(N >= 6, ErrorCode::InvalidArgument, "recursion needs N >= 6");
  require(m > 0.0, ErrorCode::InvalidArgument, "recursion needs m > 0");
  return (N - 3.0) / (m * m) * ((N - 5.0) * spherical_integral(N - 4, m) - (N - 4.0) * spherical_integral(N - 2, m));
}

}  // namespace parcap
