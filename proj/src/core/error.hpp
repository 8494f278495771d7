#pragma once

#include <stdexcept>
#include <string>

namespace drape {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  OutOfRange,
  Degenerate,
  Singular,
  NonFinite,
  InvalidState,
  NotFound,
  Io,
};

const char* to_string(ErrorCode code);

// Every module reports failures through this exception; the C API maps the
// code onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace drape
