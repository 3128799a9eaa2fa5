#include "rlfalsify/errors.hpp"

namespace rlfalsify {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRowNotStochastic: return "RowNotStochastic";
    case ErrorCode::kBadDiscount: return "BadDiscount";
    case ErrorCode::kEmptyActionSet: return "EmptyActionSet";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kNotErgodic: return "NotErgodic";
    case ErrorCode::kDivergence: return "Divergence";
    case ErrorCode::kSingularA: return "SingularA";
    case ErrorCode::kSingularGram: return "SingularGram";
    case ErrorCode::kLpNumericalFailure: return "LpNumericalFailure";
    case ErrorCode::kScaleSearchExhausted: return "ScaleSearchExhausted";
    case ErrorCode::kBoundViolation: return "BoundViolation";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRowNotStochastic:
    case ErrorCode::kBadDiscount:
    case ErrorCode::kEmptyActionSet:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParseError:
    case ErrorCode::kIoError:
      return ErrorCategory::kValidation;
    case ErrorCode::kBoundViolation:
      return ErrorCategory::kTheoremViolation;
    default:
      return ErrorCategory::kNumerical;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace rlfalsify
