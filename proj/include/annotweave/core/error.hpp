#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace annotweave {

enum class ErrorCode {
  InvalidArgument,
  IdSpaceExhausted,
  DegenerateRect,
  OverlappingObjects,
  UnknownId,
  EmptyMask,
  MissingKeyframe,
  NotBoxGeometry,
  SameId,
  PointAtInfinity,
  OutOfView,
  MissingKey,
  MalformedMatrix,
  SingularMatrix,
  NoMatches,
  BadPattern,
  CorruptCsv,
  IoFailure,
  DuplicateName,
  FieldInUse,
  EmptyCategoryList,
  Locked,
  NotFound,
  ConfirmationRequired,
};

std::string_view to_string(ErrorCode code);

/// Failure raised by any module; `details` carries machine-readable context
/// (line numbers, counts, offending names).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::string details_;
};

}  // namespace annotweave
