#include "ptdelta/soliton.hpp"

#include <cmath>
#include <string>

namespace ptdelta {

double SolitonParams::peak_value() const {
  return std::sqrt(2.0 * kappa * kappa / g);
}

double soliton_value(const SolitonParams& p, double x) {
  p.validate();
  return p.peak_value() / std::cosh(p.kappa * (x - p.peak_position));
}

double soliton_derivative_from_value(double value, const SolitonParams& p,
                                     FlankSide side) {
  p.validate();
  if (!(value > 0.0)) {
    throw DomainError("soliton derivative: value must be positive");
  }
  const double arg = 1.0 - p.g * value * value / (2.0 * p.kappa * p.kappa);
  if (arg < -1e-12) {
    throw DomainError("soliton derivative: value " + std::to_string(value) +
                      " exceeds the peak " + std::to_string(p.peak_value()));
  }
  const double mag = p.kappa * value * std::sqrt(std::max(arg, 0.0));
  return side == FlankSide::rising ? mag : -mag;
}

double soliton_peak_for_value(double value, double kappa, double g, double x0) {
  const SolitonParams p{kappa, 0.0, g};
  const double peak = p.peak_value();
  if (!(value > 0.0) || value > peak * (1.0 + 1e-12)) {
    throw DomainError("soliton: requested amplitude " + std::to_string(value) +
                      " outside (0, " + std::to_string(peak) + "]");
  }
  const double ratio = std::min(value / peak, 1.0);
  return x0 + std::acosh(1.0 / ratio) / kappa;
}

}  // namespace ptdelta
