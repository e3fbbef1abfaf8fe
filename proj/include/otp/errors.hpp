#pragma once

#include <stdexcept>
#include <string>

namespace otp {

// Every failure the library reports, as a closed set of kinds. Input-shaped
// problems (bad sizes, unresolved labels, infeasible marginals) are
// "validation" failures; failures of a mathematical hypothesis discovered
// mid-computation (a negative cycle, inconsistent frozen prices) are
// "mathematical" failures. The CLI maps the two classes to different exit
// codes.
enum class ErrorKind {
  ImproperFunction,
  SpaceMismatch,
  EmptyRelation,
  LimitExceeded,
  IndexNotInDomain,
  NotCyclicallyMonotone,
  InconsistentConstraints,
  DualInconsistent,
  ConstraintNotFullDomain,
  InfeasibleMarginals,
  EmptyRestriction,
  FrozenPairsNotInSupport,
  DisconnectedGraph,
  NotLipschitzOnS,
  ConstraintViolation,
  ParseError,
  ValidationError,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::ImproperFunction: return "ImproperFunction";
    case ErrorKind::SpaceMismatch: return "SpaceMismatch";
    case ErrorKind::EmptyRelation: return "EmptyRelation";
    case ErrorKind::LimitExceeded: return "LimitExceeded";
    case ErrorKind::IndexNotInDomain: return "IndexNotInDomain";
    case ErrorKind::NotCyclicallyMonotone: return "NotCyclicallyMonotone";
    case ErrorKind::InconsistentConstraints: return "InconsistentConstraints";
    case ErrorKind::DualInconsistent: return "DualInconsistent";
    case ErrorKind::ConstraintNotFullDomain: return "ConstraintNotFullDomain";
    case ErrorKind::InfeasibleMarginals: return "InfeasibleMarginals";
    case ErrorKind::EmptyRestriction: return "EmptyRestriction";
    case ErrorKind::FrozenPairsNotInSupport: return "FrozenPairsNotInSupport";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::NotLipschitzOnS: return "NotLipschitzOnS";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "UnknownError";
}

// True for failures of a mathematical hypothesis (as opposed to malformed or
// inconsistent input data).
inline bool is_mathematical_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotCyclicallyMonotone:
    case ErrorKind::InconsistentConstraints:
    case ErrorKind::DualInconsistent:
    case ErrorKind::NotLipschitzOnS:
    case ErrorKind::ConstraintViolation:
    case ErrorKind::FrozenPairsNotInSupport:
    case ErrorKind::EmptyRestriction:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace otp
