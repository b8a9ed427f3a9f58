#pragma once

#include <stdexcept>
#include <string>

namespace mdml {

// Error categories mirrored one-to-one by the C API status codes.
enum class ErrorCode {
  InvalidArgument = 1,
  Dimension = 2,
  DegenerateInput = 3,
  Sampling = 4,
  Io = 5,
  Format = 6,
  Diverged = 7,
  MissingSpecialist = 8,
  Internal = 9,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace mdml
