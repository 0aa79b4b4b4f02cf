#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hbvm {

/// Raised when method parameters violate a precondition (e.g. s > k).
class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Newton iteration for a Gauss-Legendre root did not settle.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The discrete problem for the Legendre coefficients could not be solved
/// within the iteration cap.
class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(std::size_t iterations, double last_residual)
      : std::runtime_error("nonlinear iteration did not converge after " +
                           std::to_string(iterations) +
                           " iterations (last residual " +
                           std::to_string(last_residual) + ")"),
        iterations_(iterations),
        last_residual_(last_residual) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  std::size_t iterations_;
  double last_residual_;
};

/// Coefficient vector length does not match the basis layout.
class LayoutMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hbvm
