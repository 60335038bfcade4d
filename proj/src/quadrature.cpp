#include "parcap/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <memory>
#include <string>

#include "parcap/error.hpp"

namespace parcap {

namespace {

constexpr std::size_t kLimit = 4000;

struct Workspace {
  Workspace() : w(gsl_integration_workspace_alloc(kLimit)) {}
  ~Workspace() { gsl_integration_workspace_free(w); }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  gsl_integration_workspace* w;
};

double trampoline(double x, void* p) { return (*static_cast<const Integrand*>(p))(x); }

void disable_gsl_abort() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

QuadResult finish(int status, double value, double err, const char* rule) {
  if (status != GSL_SUCCESS)
    throw Error(ErrorCode::QuadratureFailed, std::string(rule) + ": " + gsl_strerror(status));
  return {value, err};
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b, double epsabs, double epsrel) {
  disable_gsl_abort();
  if (a == b) return {};
  Workspace ws;
  gsl_function F{&trampoline, const_cast<Integrand*>(&f)};
  double v = 0.0, e = 0.0;
  int s = gsl_integration_qag(&F, a, b, epsabs, epsrel, kLimit, GSL_INTEG_GAUSS21, ws.w, &v, &e);
  return finish(s, v, e, "qag");
}

QuadResult integrate_singular(const Integrand& f, double a, double b, double epsabs, double epsrel) {
  disable_gsl_abort();
  if (a == b) return {};
  Workspace ws;
  gsl_function F{&trampoline, const_cast<Integrand*>(&f)};
  double v = 0.0, e = 0.0;
  int s = gsl_integration_qags(&F, a, b, epsabs, epsrel, kLimit, ws.w, &v, &e);
  return finish(s, v, e, "qags");
}

QuadResult integrate_upper(const Integrand& f, double a, double epsabs, double epsrel) {
  disable_gsl_abort();
  Workspace ws;
  gsl_function F{&trampoline, const_cast<Integrand*>(&f)};
  double v = 0.0, e = 0.0;
  int s = gsl_integration_qagiu(&F, a, epsabs, epsrel, kLimit, ws.w, &v, &e);
  return finish(s, v, e, "qagiu");
}

QuadResult integrate_breaks(const Integrand& f, std::vector<double> points, double epsabs, double epsrel) {
  disable_gsl_abort();
  require(points.size() >= 2, ErrorCode::InvalidArgument, "need at least two break points");
  Workspace ws;
  gsl_function F{&trampoline, const_cast<Integrand*>(&f)};
  double v = 0.0, e = 0.0;
  int s = gsl_integration_qagp(&F, points.data(), points.size(), epsabs, epsrel, kLimit, ws.w, &v, &e);
  return finish(s, v, e, "qagp");
}

std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b) {
  require(n >= 1, ErrorCode::InvalidArgument, "Gauss-Legendre needs n >= 1");
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> tab(
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n)), &gsl_integration_glfixed_table_free);
  std::vector<std::pair<double, double>> out(n);
  for (int i = 0; i < n; ++i) {
    double x = 0.0, w = 0.0;
    gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &x, &w, tab.get());
    out[i] = {x, w};
  }
  return out;
}

}  // namespace parcap
