#pragma once

#include <stdexcept>
#include <string>

namespace varioeta {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  undefined,   // statistic not defined for the current sample count
  domain,      // point outside an evaluator's domain
  convergence, // quadrature refinements disagree
  divergence,
  io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace varioeta
