#pragma once

#include <stdexcept>
#include <string>

namespace spinsim {

enum class ErrorKind {
  kInvalidArgument,
  kTrivialSpin,
  kHalfIntegerSpin,
  kNonHermitian,
  kDimensionMismatch,
  kEmptyInput,
  kOutOfDomain,
  kNoReversalWindow,
  kGapClosed,
  kStiffness,
  kInconsistentParity,
  kPeriodMismatch,
  kNotConverged,
  kWindowMismatch,
  kConfig,
  kIo,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kTrivialSpin: return "trivial spin";
    case ErrorKind::kHalfIntegerSpin: return "half-integer spin";
    case ErrorKind::kNonHermitian: return "non-Hermitian";
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kEmptyInput: return "empty input";
    case ErrorKind::kOutOfDomain: return "out of domain";
    case ErrorKind::kNoReversalWindow: return "no reversal window";
    case ErrorKind::kGapClosed: return "gap closed";
    case ErrorKind::kStiffness: return "stiffness";
    case ErrorKind::kInconsistentParity: return "inconsistent parity";
    case ErrorKind::kPeriodMismatch: return "period mismatch";
    case ErrorKind::kNotConverged: return "not converged";
    case ErrorKind::kWindowMismatch: return "window mismatch";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace spinsim
