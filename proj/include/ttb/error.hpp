#pragma once

#include <stdexcept>
#include <string>

namespace ttb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes (mismatched modes, non-square input, guardrail).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Eigen/SVD solver failure.
class SpectralError : public Error {
 public:
  using Error::Error;
};

/// A generated sample or ensemble description violates a theorem hypothesis.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration, serialized tensor or unsupported pairing.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ttb
