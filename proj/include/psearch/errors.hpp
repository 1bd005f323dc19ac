#pragma once

#include <stdexcept>
#include <string>

namespace psearch {

// Base class for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An argument left the domain an operation is defined on (x outside [lo, hi],
// k outside its bracket, a discount factor outside (0,1), ...).
struct DomainError : Error {
  using Error::Error;
};

// A conditional expectation was requested on a zero-mass event.
struct UndefinedConditionalError : Error {
  using Error::Error;
};

// Search is never worthwhile (theta_lo >= delta * mean), so equilibrium
// constructions have nothing to do.
struct NeverSearchError : Error {
  using Error::Error;
};

// A root finder or fixed-point iteration failed to converge or to bracket.
struct SolverError : Error {
  using Error::Error;
};

// A distribution, contract or public-signal model violates its invariants.
struct ModelError : Error {
  using Error::Error;
};

// Malformed run configuration or contract file.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace psearch
