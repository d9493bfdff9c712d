#pragma once

#include <stdexcept>
#include <string>

namespace svmsel {

enum class ErrorCode {
  invalid_argument = 1,
  domain = 2,
  not_psd = 3,
  convergence = 4,
  config = 5,
  io = 6,
};

/// Exception raised by every module. Carries the module name so that the
/// experiment runner and the C API can surface where a failure originated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

[[noreturn]] void fail(ErrorCode code, const char* module, const std::string& message);

inline void require(bool condition, const char* module, const std::string& message) {
  if (!condition) fail(ErrorCode::invalid_argument, module, message);
}

}  // namespace svmsel
