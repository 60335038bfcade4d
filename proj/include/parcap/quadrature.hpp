#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace parcap {

struct QuadResult {
  double value = 0.0;
  double abserr = 0.0;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (21 point) on [a, b]. Throws QuadratureFailed.
QuadResult integrate(const Integrand& f, double a, double b, double epsabs, double epsrel);
/// Adaptive rule with extrapolation, for integrable endpoint singularities.
QuadResult integrate_singular(const Integrand& f, double a, double b, double epsabs, double epsrel);
/// Integral over [a, +inf).
QuadResult integrate_upper(const Integrand& f, double a, double epsabs, double epsrel);
/// Adaptive integration with known interior break points (sorted, endpoints included).
QuadResult integrate_breaks(const Integrand& f, std::vector<double> points, double epsabs, double epsrel);

/// n-point Gauss-Legendre nodes and weights on [a, b].
std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b);

}  // namespace parcap
