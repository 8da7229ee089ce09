#include "varioeta/error.hpp"

namespace varioeta {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::non_finite: return "non-finite value";
    case ErrorCode::undefined: return "undefined statistic";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::convergence: return "quadrature did not converge";
    case ErrorCode::divergence: return "optimization diverged";
    case ErrorCode::io: return "i/o error";
  }
  return "unknown error";
}

}  // namespace varioeta
