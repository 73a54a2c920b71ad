#pragma once

#include <stdexcept>
#include <string>

namespace gsrcpd {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
  public:
    using Error::Error;
};

class DimensionMismatch : public DomainError {
  public:
    using DomainError::DomainError;
};

/// A spanning weight in a statistic's denominator vanished.
class DegenerateWindow : public Error {
  public:
    using Error::Error;
};

/// An iterative numerical routine failed to converge.
class NumericalFault : public Error {
  public:
    using Error::Error;
};

}  // namespace gsrcpd
