#pragma once

#include <stdexcept>
#include <string>

namespace latdiff {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, undefined samples, invalid parameters.
struct InputError : Error {
  using Error::Error;
};

// Valid input outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Convergence failure, ill-conditioning, failed self-checks.
struct NumericalError : Error {
  using Error::Error;
};

// Inconsistent configuration (duplicate basis members, too small a box).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace latdiff
