#pragma once

#include "ptdelta/errors.hpp"

namespace ptdelta {

/// Bright soliton sqrt(2 kappa^2 / g) sech(kappa (x - peak_position)),
/// the only decaying stationary solution of the potential-free attractive
/// equation; kappa^2 = -mu.
struct SolitonParams {
  double kappa;
  double peak_position;
  double g;

  void validate() const {
    if (!(kappa > 0.0) || !(g > 0.0)) {
      throw DomainError("soliton: requires kappa > 0 and attractive g > 0");
    }
  }
  double peak_value() const;
};

enum class FlankSide { rising, falling };  ///< left resp. right of the peak

double soliton_value(const SolitonParams& p, double x);

/// Slope of the soliton expressed through its local value,
///   psi' = +- kappa psi sqrt(1 - g psi^2 / (2 kappa^2)),
/// positive on the rising flank. Errors when the value exceeds the peak.
double soliton_derivative_from_value(double value, const SolitonParams& p,
                                     FlankSide side = FlankSide::rising);

/// Peak position such that the rising flank passes through `value` at x0.
double soliton_peak_for_value(double value, double kappa, double g, double x0);

}  // namespace ptdelta
