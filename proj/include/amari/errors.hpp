#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amari {

enum class ErrorKind {
  InvalidArgument,
  RangeError,
  InvalidDomain,
  GridMismatch,
  AtomicSpectrum,
  EmptyPointSet,
  NotNonnegative,
  NotInS,
  NonpositiveEigenvalue,
  RankExceeded,
  BlowUp,
  IndexOutOfRange,
  InsufficientData,
  DimensionMismatch,
  ParseError,
  UnknownKey,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::InvalidDomain: return "InvalidDomain";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::AtomicSpectrum: return "AtomicSpectrum";
    case ErrorKind::EmptyPointSet: return "EmptyPointSet";
    case ErrorKind::NotNonnegative: return "NotNonnegative";
    case ErrorKind::NotInS: return "NotInS";
    case ErrorKind::NonpositiveEigenvalue: return "NonpositiveEigenvalue";
    case ErrorKind::RankExceeded: return "RankExceeded";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Failures of the numerics itself (as opposed to bad input). The CLI maps
/// these to exit code 2.
constexpr bool is_numerical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotNonnegative:
    case ErrorKind::NotInS:
    case ErrorKind::NonpositiveEigenvalue:
    case ErrorKind::BlowUp:
    case ErrorKind::InsufficientData:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace detail

}  // namespace amari
