#pragma once

#include <stdexcept>
#include <string>

namespace rqe {

// Numeric values are shared with the C API status codes in rqe.h.
enum class ErrorCode : int {
  InvalidArgument = 1,
  OutOfRange = 2,
  Numerical = 3,
  Config = 4,
  Io = 5,
  SchemaVersion = 6,
  ResourceLimit = 7,
  Estimation = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rqe
