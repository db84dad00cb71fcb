#include "cadm/error.h"

namespace cadm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kInvalidScale: return "InvalidScale";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kCorruptData: return "CorruptData";
    case ErrorCode::kInvalidIndex: return "InvalidIndex";
    case ErrorCode::kNotACadmFile: return "NotACadmFile";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidSchedule: return "InvalidSchedule";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kNumericalDivergence: return "NumericalDivergence";
    case ErrorCode::kSchedulerError: return "SchedulerError";
    case ErrorCode::kInputError: return "InputError";
    case ErrorCode::kConditionMismatch: return "ConditionMismatch";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

}  // namespace cadm
