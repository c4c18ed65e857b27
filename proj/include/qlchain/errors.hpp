#pragma once

#include <stdexcept>
#include <string>

namespace qlchain {

// Invalid configuration or violated precondition. CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: non-convergence, ill-conditioning, unphysical output.
// CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pole with non-negative real part.
class StabilityError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Two poles (or two mode frequencies) closer than the degeneracy tolerance.
// The ensemble driver resamples on this error.
class DegeneracyError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Independent verification paths disagree. CLI exit code 4.
class OracleDisagreement : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qlchain
