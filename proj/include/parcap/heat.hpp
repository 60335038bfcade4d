#pragma once

#include <functional>
#include <vector>

#include "parcap/geometry.hpp"
#include "parcap/grid.hpp"

namespace parcap {

/// Gaussian heat kernel H(x, y, t) = (4πt)^{-N/2} exp(-|x-y|^2 / 4t).
double heat_kernel(const Point& x, const Point& y, double t);

/// Heat potential ℍ[μ](x, t): atoms exactly, the density through its
/// piecewise multilinear interpolant (exact Gaussian-hat weights).
double heat_potential(const RadonMeasure& mu, const Point& x, double t);

/// ℍ[η](x, t) for a 1-D density given as a function, by adaptive quadrature.
double heat_potential_1d(const std::function<double(double)>& density, double x, double t);

/// 𝔾[f](x, t) = ∫_0^t ℍ[f(s)](x, t - s) ds by the trapezoid rule over the
/// time-stamped slices of f, which must cover [0, t] uniformly.
double green_potential(const std::vector<GridFunction>& f, const Point& x, double t);

/// M (4at+1)^{-N/2} exp(-a (|x|-b)_+^2 / (4at+1)); b = 0 gives the plain
/// Gaussian bound, N = x.size().
double gaussian_decay_bound(double M, double a, double b, const Point& x, double t);

/// 𝓘_N(m) = ∫_0^π e^{m cos θ} sin^{N-2} θ dθ by adaptive quadrature.
double spherical_integral(int N, double m);
/// e^{-m} 𝓘_N(m), safe for large m.
double spherical_integral_scaled(int N, double m);
/// 𝓘_N(m) (1+m)^{(N-1)/2} e^{-m}; bounded in m.
double spherical_envelope_ratio(int N, double m);

/// Right side of ((N-3)(N-5)/m^2)(𝓘_{N-4} - 𝓘_{N-2}) (N >= 6). This factored
/// form is not an identity; see spherical_recursion.
double spherical_recursion_factored(int N, double m);
/// Right side of ((N-3)/m^2)((N-5)𝓘_{N-4} - (N-4)𝓘_{N-2}), the identity
/// that integration by parts actually gives (N >= 6).
double spherical_recursion(int N, double m);

}  // namespace parcap
