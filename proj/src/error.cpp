#include "medsens/error.hpp"

namespace medsens {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::DegenerateResponse: return "DegenerateResponse";
    case ErrorCode::BoundaryR: return "BoundaryR";
    case ErrorCode::ConfounderCovarianceDegenerate: return "ConfounderCovarianceDegenerate";
    case ErrorCode::DegenerateObservedR: return "DegenerateObservedR";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooManySingularResamples: return "TooManySingularResamples";
    case ErrorCode::EstimatorFailed: return "EstimatorFailed";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::DegenerateAnchor: return "DegenerateAnchor";
    case ErrorCode::InfeasibleTarget: return "InfeasibleTarget";
    case ErrorCode::RootFindFailed: return "RootFindFailed";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  return code == ErrorCode::ParseError || code == ErrorCode::InvalidArgument ||
         code == ErrorCode::DimensionMismatch || code == ErrorCode::InsufficientSamples;
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

}  // namespace medsens
