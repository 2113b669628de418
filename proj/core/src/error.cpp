#include "rld/error.hpp"

namespace rld {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidNetwork: return "InvalidNetwork";
    case ErrorCode::DisconnectedNetwork: return "DisconnectedNetwork";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::InfeasibleNetwork: return "InfeasibleNetwork";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::UnsupportedPattern: return "UnsupportedPattern";
    case ErrorCode::MultipleCongestion: return "MultipleCongestion";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::CholeskyFailure: return "CholeskyFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace rld
