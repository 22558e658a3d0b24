#include "sigsal/errors.hpp"

namespace sigsal {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kUnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInvalidShape: return "InvalidShape";
    case ErrorCode::kInvalidBasis: return "InvalidBasis";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kMissingWeight: return "MissingWeight";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kUnknownLayer: return "UnknownLayer";
    case ErrorCode::kNotParametric: return "NotParametric";
    case ErrorCode::kNoComponents: return "NoComponents";
    case ErrorCode::kNoData: return "NoData";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace sigsal
