#include "core/errors.hpp"

namespace jdim {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::none: return "ok";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::pole: return "pole";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::all_pruned: return "all_pruned";
    case ErrorCode::empty_matrix: return "empty_matrix";
    case ErrorCode::no_sign_change: return "no_sign_change";
    case ErrorCode::structure: return "structure";
    case ErrorCode::ambiguity: return "ambiguity";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace jdim
