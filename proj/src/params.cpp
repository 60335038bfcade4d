#include "parcap/params.hpp"

#include <cmath>
#include <string>

#include "parcap/error.hpp"

namespace parcap {

ProblemParams ProblemParams::make(int N, double q) {
  require(N >= 1, ErrorCode::InvalidArgument, "dimension N must be >= 1, got " + std::to_string(N));
  require(std::isfinite(q) && q > 1.0, ErrorCode::InvalidArgument,
          "exponent q must be > 1, got " + std::to_string(q));
  ProblemParams p;
  p.N = N;
  p.q = q;
  p.qprime = q / (q - 1.0);
  p.qc = 1.0 + 2.0 / N;
  p.supercritical = q >= p.qc;
  return p;
}

double ProblemParams::universal_bound(double t) const {
  require(t > 0.0, ErrorCode::NonpositiveTime, "universal bound needs t > 0");
  return std::pow(1.0 / ((q - 1.0) * t), 1.0 / (q - 1.0));
}

}  // namespace parcap
