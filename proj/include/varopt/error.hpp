#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace varopt {

enum class ErrorCode {
  // validation
  DimensionMismatch,
  OutOfBounds,
  OutOfUnitCube,
  InvalidSpace,
  InvalidConfig,
  ZeroSamples,
  TooFewPoints,
  TooFewSamples,
  InsufficientBins,
  LengthMismatch,
  EmptyValues,
  MissingResponses,
  MissingFoM,
  UnknownColumn,
  UnsupportedVersion,
  // input/output
  IoFailure,
  MalformedCSV,
  NonNumericCell,
  MalformedJson,
  // numerical
  SingularSystem,
  NonFiniteLoss,
  SimulatorFailure,
};

enum class ErrorCategory { Validation, Io, Numerical };

constexpr ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoFailure:
    case ErrorCode::MalformedCSV:
    case ErrorCode::NonNumericCell:
    case ErrorCode::MalformedJson:
      return ErrorCategory::Io;
    case ErrorCode::SingularSystem:
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::SimulatorFailure:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Validation;
  }
}

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. The code selects the CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace varopt
