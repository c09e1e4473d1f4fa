#pragma once

#include <stdexcept>
#include <string>

namespace barrier {

/// Base of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not reach its requested accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace barrier
