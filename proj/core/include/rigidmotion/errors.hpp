#pragma once

#include <stdexcept>
#include <string>

namespace rigidmotion {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed scenario, invalid graph, non-rigid reference, etc.
/// The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation could not be carried out on otherwise valid input.
/// The CLI maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidGraph : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RigidityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PositivityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ZeroEdge : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ZeroVector : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateShape : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Unreachable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveDistance : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EdgeCollapse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateAlignment : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientDecay : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rigidmotion
