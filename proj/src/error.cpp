#include "svmsel/error.hpp"

#include <utility>

namespace svmsel {

Error::Error(ErrorCode code, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + message), code_(code), module_(std::move(module)) {}

void fail(ErrorCode code, const char* module, const std::string& message) {
  throw Error(code, module, message);
}

}  // namespace svmsel
