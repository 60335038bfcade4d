#include "parcap/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "parcap/error.hpp"

namespace parcap {

namespace {

// FFTW planning is not thread safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct RealBuf {
  explicit RealBuf(std::size_t n) : p(fftw_alloc_real(n)), n(n) {}
  ~RealBuf() { fftw_free(p); }
  double* p;
  std::size_t n;
};

struct ComplexBuf {
  explicit ComplexBuf(std::size_t n) : p(fftw_alloc_complex(n)), n(n) {}
  ~ComplexBuf() { fftw_free(p); }
  fftw_complex* p;
  std::size_t n;
};

}  // namespace

struct FourierMultiplier::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

FourierMultiplier::FourierMultiplier(const UniformGrid& grid, const std::function<double(double)>& symbol_of_xi2)
    : grid_(grid), plans_(std::make_unique<Plans>()) {
  require(grid.dim() >= 1, ErrorCode::InvalidArgument, "multiplier needs a grid");
  const int d = grid.dim();
  n_real_ = grid.size();
  n_complex_ = n_real_ / grid.n[d - 1] * (grid.n[d - 1] / 2 + 1);
  symbol_.resize(n_complex_);
  std::vector<int> shape(grid.n.begin(), grid.n.end());
  std::vector<int> cshape = shape;
  cshape[d - 1] = shape[d - 1] / 2 + 1;
  for (std::size_t f = 0; f < n_complex_; ++f) {
    std::size_t rem = f;
    double xi2 = 0.0;
    for (int a = d - 1; a >= 0; --a) {
      int k = static_cast<int>(rem % cshape[a]);
      rem /= cshape[a];
      int kk = (a == d - 1) ? k : (k <= shape[a] / 2 ? k : k - shape[a]);
      double L = grid.h * shape[a];
      double xi = 2.0 * std::numbers::pi * kk / L;
      xi2 += xi * xi;
    }
    symbol_[f] = symbol_of_xi2(xi2) / static_cast<double>(n_real_);
  }
  RealBuf r(n_real_);
  ComplexBuf c(n_complex_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->forward = fftw_plan_dft_r2c(d, shape.data(), r.p, c.p, FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft_c2r(d, shape.data(), c.p, r.p, FFTW_ESTIMATE);
  require(plans_->forward && plans_->backward, ErrorCode::InvalidArgument, "FFTW planning failed");
}

FourierMultiplier::~FourierMultiplier() = default;

void FourierMultiplier::apply(const std::vector<double>& in, std::vector<double>& out) const {
  require(in.size() == n_real_, ErrorCode::InvalidArgument, "multiplier input has wrong size");
  RealBuf r(n_real_);
  ComplexBuf c(n_complex_);
  std::memcpy(r.p, in.data(), n_real_ * sizeof(double));
  fftw_execute_dft_r2c(plans_->forward, r.p, c.p);
  for (std::size_t k = 0; k < n_complex_; ++k) {
    c.p[k][0] *= symbol_[k];
    c.p[k][1] *= symbol_[k];
  }
  fftw_execute_dft_c2r(plans_->backward, c.p, r.p);
  out.assign(r.p, r.p + n_real_);
}

std::vector<double> FourierMultiplier::kernel() const {
  std::vector<double> delta(n_real_, 0.0), out;
  delta[0] = 1.0;
  apply(delta, out);
  return out;
}

void FourierMultiplier::convolve(const std::vector<double>& a, const std::vector<double>& b,
                                 std::vector<double>& out) const {
  require(a.size() == n_real_ && b.size() == n_real_, ErrorCode::InvalidArgument, "convolution input has wrong size");
  RealBuf r(n_real_);
  ComplexBuf ca(n_complex_), cb(n_complex_);
  std::memcpy(r.p, a.data(), n_real_ * sizeof(double));
  fftw_execute_dft_r2c(plans_->forward, r.p, ca.p);
  std::memcpy(r.p, b.data(), n_real_ * sizeof(double));
  fftw_execute_dft_r2c(plans_->forward, r.p, cb.p);
  const double inv = 1.0 / static_cast<double>(n_real_);
  for (std::size_t k = 0; k < n_complex_; ++k) {
    double re = ca.p[k][0] * cb.p[k][0] - ca.p[k][1] * cb.p[k][1];
    double im = ca.p[k][0] * cb.p[k][1] + ca.p[k][1] * cb.p[k][0];
    ca.p[k][0] = re * inv;
    ca.p[k][1] = im * inv;
  }
  fftw_execute_dft_c2r(plans_->backward, ca.p, r.p);
  out.assign(r.p, r.p + n_real_);
}

std::unique_ptr<FourierMultiplier> bessel_potential_operator(const UniformGrid& grid, double s) {
  return std::make_unique<FourierMultiplier>(grid, [s](double xi2) { return std::pow(1.0 + xi2, -0.5 * s); });
}

std::unique_ptr<FourierMultiplier> bessel_derivative_operator(const UniformGrid& grid, double s) {
  return std::make_unique<FourierMultiplier>(grid, [s](double xi2) { return std::pow(1.0 + xi2, 0.5 * s); });
}

}  // namespace parcap
