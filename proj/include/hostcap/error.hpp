#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hostcap {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  GraphNotTree,
  ParseError,
  EmptyFile,
  BadCount,
  BadDelta,
  NoSolution,
  NonConvergence,
  NumericalFailure,
  BaseInfeasible,
  InvalidCertificate,
  ProvenanceMismatch,
  InvariantViolation,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::GraphNotTree: return "GraphNotTree";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::BadCount: return "BadCount";
    case ErrorKind::BadDelta: return "BadDelta";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::BaseInfeasible: return "BaseInfeasible";
    case ErrorKind::InvalidCertificate: return "InvalidCertificate";
    case ErrorKind::ProvenanceMismatch: return "ProvenanceMismatch";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace hostcap
