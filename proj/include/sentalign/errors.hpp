#pragma once

#include <stdexcept>
#include <string>

namespace sentalign {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameter value (negative rcond, zero learning rate, bad flag).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed, mismatched or non-finite input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed (no convergence, singular system, divergence).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sentalign
