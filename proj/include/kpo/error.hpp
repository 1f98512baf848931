#pragma once

#include <stdexcept>
#include <string>

namespace kpo {

// Bad physical or numerical input (non-finite values, too-small dimensions, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested a symmetry-adapted construction on a Hamiltonian that breaks it.
class SymmetryViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An iterative solver hit its cap. The message carries the iteration diagnostics.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what + " (iterations=" + std::to_string(iterations) +
                           ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace kpo
