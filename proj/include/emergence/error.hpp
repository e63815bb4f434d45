#pragma once

#include <stdexcept>
#include <string>

namespace emergence {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// R is not symmetric or not strictly positive.
class AxiomViolation : public Error {
 public:
  explicit AxiomViolation(const std::string& what)
      : Error("axiom violation: " + what) {}
};

/// Two objects that must share a lattice (or a mode count) do not.
class LatticeMismatch : public Error {
 public:
  explicit LatticeMismatch(const std::string& what)
      : Error("lattice mismatch: " + what) {}
};

/// Input rejected by a precondition check.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// Quadrature or iteration failed to converge within its budget.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what)
      : Error("convergence failure: " + what) {}
};

}  // namespace emergence
