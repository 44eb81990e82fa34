#pragma once

#include <stdexcept>
#include <string>

namespace puflearn {

/// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad sizes, invalid parameters, malformed configs.
struct InvalidArgument : Error {
  using Error::Error;
};

struct DimensionMismatch : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

/// Numerical failure: singular or indefinite system, eigensolver stall.
struct NumericalError : Error {
  using Error::Error;
};

struct EigNonConvergence : NumericalError {
  int sweeps;
  EigNonConvergence(const std::string& msg, int sweeps_)
      : NumericalError(msg), sweeps(sweeps_) {}
};

struct NotPositiveDefinite : NumericalError {
  double lambda_min_estimate;
  NotPositiveDefinite(const std::string& msg, double lmin)
      : NumericalError(msg), lambda_min_estimate(lmin) {}
};

struct OverflowError : Error {
  using Error::Error;
};

}  // namespace puflearn
