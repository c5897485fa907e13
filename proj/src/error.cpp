#include "calib/error.hpp"

namespace calib {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ValidationFailure: return "ValidationFailure";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateLines: return "DegenerateLines";
    case ErrorCode::AmbiguousRoll: return "AmbiguousRoll";
    case ErrorCode::CoincidentPoint: return "CoincidentPoint";
    case ErrorCode::ProjectionFailure: return "ProjectionFailure";
    case ErrorCode::InfeasibleGeometry: return "InfeasibleGeometry";
    case ErrorCode::HorizonViolation: return "HorizonViolation";
    case ErrorCode::InconsistentPartial: return "InconsistentPartial";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::SchemaFailure: return "SchemaFailure";
    case ErrorCode::Incomplete: return "Incomplete";
  }
  return "Unknown";
}

}  // namespace calib
