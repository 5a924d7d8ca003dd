#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dmcv {

enum class ErrorKind {
  NonPhysicalInput,
  NotHermitian,
  NotPSD,
  ConvergenceFailure,
  DimensionMismatch,
  InvalidOrder,
  Unreachable,
  TruncationTooSevere,
  DegenerateSpectrum,
  InvalidTarget,
  InsufficientTestData,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPhysicalInput: return "NonPhysicalInput";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::TruncationTooSevere: return "TruncationTooSevere";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::InvalidTarget: return "InvalidTarget";
    case ErrorKind::InsufficientTestData: return "InsufficientTestData";
  }
  return "Unknown";
}

// Every library failure is reported through this type; kind() is the stable
// machine-readable part, what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dmcv
