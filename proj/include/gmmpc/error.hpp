#pragma once

#include <stdexcept>
#include <string>

namespace gmmpc {

// Mirrors gmmpc_status in the C API.
enum class ErrorCode {
  invalid_argument = 1,
  parse = 2,
  graph = 3,
  data = 4,
  numeric = 5,
  io = 6,
  unsupported = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gmmpc
