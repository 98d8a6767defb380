#pragma once

#include <stdexcept>
#include <string>

namespace ptdelta {

/// Invalid grid, field, or parameter construction.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Shooting integration exceeded the overflow limit (divergent shot).
struct OverflowError : std::runtime_error {
  double x_abort;
  explicit OverflowError(double x)
      : std::runtime_error("shooting integration overflow at x = " + std::to_string(x)),
        x_abort(x) {}
};

/// Newton failed to converge, a root bracket could not be established,
/// or a converged state violates a stationary-state invariant.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ptdelta
