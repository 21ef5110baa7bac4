#include "varopt/error.hpp"

namespace varopt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::OutOfUnitCube: return "OutOfUnitCube";
    case ErrorCode::InvalidSpace: return "InvalidSpace";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ZeroSamples: return "ZeroSamples";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::InsufficientBins: return "InsufficientBins";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyValues: return "EmptyValues";
    case ErrorCode::MissingResponses: return "MissingResponses";
    case ErrorCode::MissingFoM: return "MissingFoM";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MalformedCSV: return "MalformedCSV";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::SimulatorFailure: return "SimulatorFailure";
  }
  return "Unknown";
}

}  // namespace varopt
