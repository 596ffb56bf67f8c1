#pragma once

#include <stdexcept>
#include <string>

namespace sqapprox {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument's value was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A strip or angle computation was handed the zero vector.
class ZeroVectorError : public DomainError {
 public:
  ZeroVectorError() : DomainError("zero coefficient vector") {}
};

/// Exact integer arithmetic would exceed 128 bits (or a documented narrower width).
class OverflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace sqapprox
