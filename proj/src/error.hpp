#pragma once

#include <stdexcept>
#include <string>

namespace ctcal {

enum class ErrorCode {
  InvalidArgument = 1,
  OutOfRange,
  Io,
  Parse,
  DegenerateReference,
  ProcedureViolation,
  Integrity,
  UnknownClass,
};

// All core failures are reported through this one exception type; the C API
// maps `code()` onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ctcal
