#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parcap {

enum class ErrorCode {
  InvalidArgument,
  UnboundedSet,
  NonpositiveTime,
  IncompleteHistory,
  NoClosedForm,
  OptimizerStalled,
  PiecesOverlap,
  PointwiseSolveFailed,
  MaximumPrincipleViolated,
  NoProfileRegime,
  ShootingFailed,
  QuadratureFailed,
  OracleDisagreement,
  SchemaMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying one of the library's error codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Thrown by the capacity optimizer; carries the last iterate's objective.
class OptimizerStalledError : public Error {
 public:
  OptimizerStalledError(const std::string& what, double last_value)
      : Error(ErrorCode::OptimizerStalled, what), last_value_(last_value) {}

  double last_value() const noexcept { return last_value_; }

 private:
  double last_value_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace parcap
