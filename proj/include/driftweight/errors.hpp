#pragma once

#include <stdexcept>
#include <string>

namespace dw {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or record dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied data violates a precondition (empty input, NaN, negative weight).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Time index or horizon out of range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Object used before it reached the required state (e.g. untrained estimator).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Input cannot define a meaningful objective (single-time stream, all-zero weights).
class DegenerateError : public InputError {
 public:
  using InputError::InputError;
};

/// Configuration failed validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or parse failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dw
