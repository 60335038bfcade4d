#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "parcap/grid.hpp"

namespace parcap {

/// Real Fourier multiplier on the periodic extension of a uniform grid.
/// The symbol is a function of |ξ|^2 with ξ_k = 2πk/L on each axis.
class FourierMultiplier {
 public:
  FourierMultiplier(const UniformGrid& grid, const std::function<double(double)>& symbol_of_xi2);
  ~FourierMultiplier();
  FourierMultiplier(const FourierMultiplier&) = delete;
  FourierMultiplier& operator=(const FourierMultiplier&) = delete;

  /// out = T in, both full-grid arrays.
  void apply(const std::vector<double>& in, std::vector<double>& out) const;
  /// Impulse response of T at the origin node, arranged so that
  /// (T v)_i = Σ_j kernel[(i - j) mod n] v_j.
  std::vector<double> kernel() const;
  /// Circular convolution (a * b)_i = Σ_j a[(i - j) mod n] b_j.
  void convolve(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& out) const;

  const UniformGrid& grid() const { return grid_; }

 private:
  struct Plans;
  UniformGrid grid_;
  std::size_t n_real_ = 0;
  std::size_t n_complex_ = 0;
  std::vector<double> symbol_;
  std::unique_ptr<Plans> plans_;
};

/// Bessel potential operator with symbol (1 + |ξ|^2)^{-s/2}.
std::unique_ptr<FourierMultiplier> bessel_potential_operator(const UniformGrid& grid, double s);
/// Λ^s with symbol (1 + |ξ|^2)^{s/2}.
std::unique_ptr<FourierMultiplier> bessel_derivative_operator(const UniformGrid& grid, double s);

}  // namespace parcap
