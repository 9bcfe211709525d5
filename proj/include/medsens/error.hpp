#pragma once

#include <stdexcept>
#include <string>

namespace medsens {

enum class ErrorCode {
  DimensionMismatch,
  RankDeficient,
  NotSymmetric,
  NegativeEigenvalue,
  SingularCovariance,
  DegenerateResponse,
  BoundaryR,
  ConfounderCovarianceDegenerate,
  DegenerateObservedR,
  InsufficientSamples,
  InvalidArgument,
  TooManySingularResamples,
  EstimatorFailed,
  BudgetTooSmall,
  DegenerateAnchor,
  InfeasibleTarget,
  RootFindFailed,
  ParseError,
};

const char* error_name(ErrorCode code);

// Input errors are the caller's fault (bad file, bad flags); everything else is numerical.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace medsens
