#include "parcap/error.hpp"

namespace parcap {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnboundedSet: return "UnboundedSet";
    case ErrorCode::NonpositiveTime: return "NonpositiveTime";
    case ErrorCode::IncompleteHistory: return "IncompleteHistory";
    case ErrorCode::NoClosedForm: return "NoClosedForm";
    case ErrorCode::OptimizerStalled: return "OptimizerStalled";
    case ErrorCode::PiecesOverlap: return "PiecesOverlap";
    case ErrorCode::PointwiseSolveFailed: return "PointwiseSolveFailed";
    case ErrorCode::MaximumPrincipleViolated: return "MaximumPrincipleViolated";
    case ErrorCode::NoProfileRegime: return "NoProfileRegime";
    case ErrorCode::ShootingFailed: return "ShootingFailed";
    case ErrorCode::QuadratureFailed: return "QuadratureFailed";
    case ErrorCode::OracleDisagreement: return "OracleDisagreement";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
  }
  return "Unknown";
}

}  // namespace parcap
