#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rlfalsify {

enum class ErrorCode {
  // input validation
  kRowNotStochastic,
  kBadDiscount,
  kEmptyActionSet,
  kInvalidArgument,
  kParseError,
  kIoError,
  // numerical failures
  kSingularSystem,
  kNonConvergence,
  kNotErgodic,
  kDivergence,
  kSingularA,
  kSingularGram,
  kLpNumericalFailure,
  kScaleSearchExhausted,
  // a proven inequality was observed to fail
  kBoundViolation,
};

enum class ErrorCategory { kValidation, kNumerical, kTheoremViolation };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

/// Exception type thrown by every library routine.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace rlfalsify
