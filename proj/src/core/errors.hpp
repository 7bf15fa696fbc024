#pragma once

#include <stdexcept>
#include <string>

namespace jdim {

enum class ErrorCode {
  none = 0,
  invalid_argument,
  pole,
  non_convergence,
  budget_exceeded,
  all_pruned,
  empty_matrix,
  no_sign_change,
  structure,
  ambiguity,
  io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace jdim
