#pragma once

#include <stdexcept>
#include <string>

namespace specinit {

// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Adaptive quadrature or series summation exceeded its budget.
class NonConvergent : public Error {
  public:
    using Error::Error;
};

// An integrand or series term evaluated to NaN/Inf.
class NonFinite : public Error {
  public:
    using Error::Error;
};

// Root finder called without a sign change on the bracket.
class NotBracketed : public Error {
  public:
    using Error::Error;
};

// A channel's eta/mu failed the unit-integral check.
class NormalizationFailure : public Error {
  public:
    using Error::Error;
};

// A design operation was requested at alpha <= alpha_weak.
class BelowThreshold : public Error {
  public:
    using Error::Error;
};

// An asymptotic prediction was requested for an infeasible preprocessor.
class InfeasiblePreprocessor : public Error {
  public:
    using Error::Error;
};

// Eigensolver ran out of iterations at maximal shift escalation.
class NoConvergence : public Error {
  public:
    using Error::Error;
};

// squared_cosine called on a (near-)zero vector.
class ZeroVector : public Error {
  public:
    using Error::Error;
};

// psi/phi evaluated at lambda <= tau.
class DomainError : public Error {
  public:
    using Error::Error;
};

// Bad CLI flags, config file, or data file.
class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace specinit
