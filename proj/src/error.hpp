#pragma once

#include <stdexcept>
#include <string>

namespace fakebob {

// Failure categories surfaced through the C API as status codes and by the
// CLI as machine-readable exit codes.
enum class ErrorCategory {
  config,
  io,
  parse,
  invalid_argument,
  data,
  state,
  budget,
  internal,
};

const char* category_name(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string message)
      : std::runtime_error(std::move(message)), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

inline void require(bool condition, ErrorCategory category, const std::string& message) {
  if (!condition) fail(category, message);
}

}  // namespace fakebob
