#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sigsal {

enum class ErrorCode {
  kFormat,
  kUnsupportedDtype,
  kUnsupportedFormat,
  kIo,
  kInvalidShape,
  kInvalidBasis,
  kDegenerateInput,
  kMissingWeight,
  kShapeError,
  kUnknownLayer,
  kNotParametric,
  kNoComponents,
  kNoData,
  kInvalidSpec,
  kInvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for every engine failure; the code tells callers
// which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace sigsal
