#pragma once

namespace parcap {

/// Dimension and absorption exponent of  u_t - Δu + u^q = 0  plus the
/// exponents derived from them.
struct ProblemParams {
  int N = 1;
  double q = 2.0;
  double qprime = 2.0;       // q/(q-1)
  double qc = 3.0;           // 1 + 2/N
  bool supercritical = false;  // q >= qc

  /// Validating constructor; throws Error(InvalidArgument) unless N >= 1, q > 1.
  static ProblemParams make(int N, double q);

  /// Fractional order 2/q of the capacity norm.
  double order() const { return 2.0 / q; }
  /// Integrability q' of the capacity norm.
  double integrability() const { return qprime; }
  /// 2/(q-1), the product order*integrability.
  double order_times_integrability() const { return 2.0 / (q - 1.0); }
  /// Scaling exponent N - 2/(q-1) of capacities of dilated sets.
  double capacity_scaling_exponent() const { return N - 2.0 / (q - 1.0); }
  /// Self-similar time exponent 1/(q-1).
  double time_exponent() const { return 1.0 / (q - 1.0); }

  /// Universal a-priori bound ((q-1)t)^{-1/(q-1)} valid for every solution.
  double universal_bound(double t) const;
};

}  // namespace parcap
