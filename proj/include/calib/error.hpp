#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace calib {

enum class ErrorCode {
  ValidationFailure,
  InsufficientData,
  NonConvergence,
  DegenerateLines,
  AmbiguousRoll,
  CoincidentPoint,
  ProjectionFailure,
  InfeasibleGeometry,
  HorizonViolation,
  InconsistentPartial,
  IoFailure,
  ParseFailure,
  SchemaFailure,
  /// A workflow step ran before the stage it depends on.
  Incomplete,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library carries one of the reason codes
/// above. `indices` lists offending element indices where that makes sense
/// (polygon vertices for HorizonViolation, for instance); `field` is a
/// document path for validation failures.
class CalibError : public std::runtime_error {
 public:
  CalibError(ErrorCode code, const std::string& message,
             std::vector<int> indices = {}, std::string field = {})
      : std::runtime_error(message),
        code_(code),
        indices_(std::move(indices)),
        field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<int>& indices() const noexcept { return indices_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::vector<int> indices_;
  std::string field_;
};

}  // namespace calib
