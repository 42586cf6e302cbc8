#pragma once

#include <stdexcept>
#include <string>

namespace polytrope {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where the operation is defined
/// (e.g. n > 5, a Padé request for n != 3, the Noether charge at n = 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: step-size underflow, missing root bracket,
/// quadrature that did not converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace polytrope
