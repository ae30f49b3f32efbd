#pragma once

#include <stdexcept>
#include <string>

namespace wg {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMeshError : public Error {
 public:
  using Error::Error;
};

class UnsupportedConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDegreeError : public Error {
 public:
  using Error::Error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class InvalidMatrixError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Raised when a measured contraction number is not below one.
class PreconditionerDefectError : public Error {
 public:
  using Error::Error;
};

}  // namespace wg
