#ifndef CADM_ERROR_H_
#define CADM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cadm {

enum class ErrorCode {
  kParseError,
  kUnsupportedFormat,
  kInvalidScale,
  kInvalidConfig,
  kEmptyInput,
  kCorruptData,
  kInvalidIndex,
  kNotACadmFile,
  kUnsupportedVersion,
  kInvalidArgument,
  kInvalidSchedule,
  kShapeError,
  kNumericalDivergence,
  kSchedulerError,
  kInputError,
  kConditionMismatch,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cadm

#endif  // CADM_ERROR_H_
