#pragma once

#include <array>
#include <vector>

#include "ptdelta/complex_field.hpp"
#include "ptdelta/well_system.hpp"

namespace ptdelta {

/// One point where two waves exchange amplitude through a delta-localized
/// linear coupling of strength gamma (always positive by convention).
struct CouplingPoint {
  double x0;
  double gamma;
  std::array<std::size_t, 2> partners;  ///< wave indices {system, environment}
};

/// Closed Hermitian system of coupled stationary waves on one grid, all
/// sharing the same chemical potential. Immutable after construction.
struct CoupledSystem {
  Complex mu;
  double g;
  std::vector<ComplexField> waves;
  std::vector<std::vector<DeltaSpike>> wells;  ///< real delta wells per wave
  std::vector<CouplingPoint> couplings;
  std::vector<bool> unbound;  ///< waves with non-decaying tails (feeders)

  // construction diagnostics
  double coupling_residual_max = 0.0;  ///< |i Gamma_target - gamma psi_b/psi_a|
  double phase_residual_max = 0.0;     ///< deviation from the +-pi/2 relation
  double flux_imbalance = 0.0;         ///< in- vs outflux mismatch at the wells
  double gamma_tilde = 0.0;            ///< second coupling strength (two-feeder)
  double phase_defect = 0.0;           ///< bound-feeder defect of the host state
};

/// gamma = Gamma |psi_sys(x0)| / |psi_env(x0)| (positive branch).
double coupling_gamma(Complex psi_sys_at_x0, Complex psi_env_at_x0, double Gamma);

/// Delta strength the environment wave experiences when it feeds the
/// system's source well: V - i Gamma |psi_sys(x0)/psi_env(x0)|^2. The
/// imaginary part is negative (a drain) for every admissible input; the
/// drain-side feeder sees the complex conjugate strength.
Complex effective_env_potential(Complex psi_sys_at_x0, Complex psi_env_at_x0, double V,
                                double Gamma);

}  // namespace ptdelta
