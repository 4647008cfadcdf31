#pragma once

#include <stdexcept>
#include <string>

namespace nlllab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent game / run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Admissible set is empty (h·σ²·|S(x)| > 1) or a projection target is infeasible.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

/// Enumeration or kernel support exceeds a configured cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Step-halving check of a fixed-step integrator disagreed beyond tolerance.
class AccuracyError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Persisted artifact failed header or checksum validation.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlllab
