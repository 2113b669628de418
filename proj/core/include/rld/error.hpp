#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rld {

enum class ErrorCode {
  InvalidNetwork,
  DisconnectedNetwork,
  DimensionMismatch,
  NumericalFailure,
  InfeasibleNetwork,
  DomainError,
  NoConvergence,
  DegenerateCovariance,
  SingularSystem,
  UnsupportedPattern,
  MultipleCongestion,
  Unsupported,
  CholeskyFailure,
  ParseError,
  ValidationError,
};

/// Stable machine-readable name, e.g. "InfeasibleNetwork".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rld
