#include "core/error.hpp"

namespace drape {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::OutOfRange: return "out of range";
    case ErrorCode::Degenerate: return "degenerate geometry";
    case ErrorCode::Singular: return "singular system";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::InvalidState: return "invalid state";
    case ErrorCode::NotFound: return "not found";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace drape
