#ifndef GAINLOSS_ERRORS_HPP
#define GAINLOSS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gainloss {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected inputs: bad parameters, broken preconditions, malformed configs.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures (non-physical covariances, truncation leakage, stalled
/// integrators). The CLI maps this family to exit code 2.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InvalidParameters : public InputError {
 public:
  using InputError::InputError;
};

class NotPTSymmetric : public InputError {
 public:
  using InputError::InputError;
};

class NonPositiveEffectiveGain : public InputError {
 public:
  using InputError::InputError;
};

class NegativeDiffusion : public InputError {
 public:
  using InputError::InputError;
};

/// Stationary state requested for a drift with eigenvalues in the open right
/// half-plane.
class Unstable : public InputError {
 public:
  using InputError::InputError;
};

/// Stationary state requested on the stability boundary (e.g. the PT line),
/// where no unique bounded solution exists.
class MarginallyStable : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class NonPhysical : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class DomainError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class StepSizeUnderflow : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class CutoffExceeded : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace gainloss

#endif  // GAINLOSS_ERRORS_HPP
