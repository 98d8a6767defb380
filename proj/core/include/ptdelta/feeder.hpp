#pragma once

#include <span>
#include <vector>

#include "ptdelta/coupling.hpp"
#include "ptdelta/stationary.hpp"

namespace ptdelta {

/// Environment construction for a stationary double-delta state: feeders are
/// auxiliary waves, linearly coupled at single points, that realize the
/// imaginary parts of the potential through particle exchange. The closed
/// compound system is Hermitian; every coupling satisfies
///   i Gamma_target = gamma psi_env(x0) / psi_sys(x0)
/// with real positive gamma, which fixes the feeder phases to +-pi/2
/// relative to the system wave at the coupling points.

struct TwoFeederChoice {
  double psi2_at_a;        ///< incoming feeder amplitude at the source well
  double psi3_at_minus_a;  ///< outgoing feeder amplitude at the drain well
};

/// Two feeders, one per well. Each is an exact soliton flank on its
/// vanishing side, placed so the coupling-point value matches the requested
/// amplitude, with the slope from the soliton value relation; across the
/// coupling point the wave continues numerically through the effective
/// (drain- resp. source-type) delta.
CoupledSystem build_two_feeder_system(const StationaryState& state,
                                      const TwoFeederChoice& amplitudes,
                                      const Grid& grid);

struct SingleFeederOptions {
  double slope_scale_min = 1e-3;  ///< search range, units of psi2_at_0
  double slope_scale_max = 1e2;
  int scan_points = 200;
  double bisect_tol = 1e-10;
};

/// One unbound feeder with two coupling points. psi2(0) is real and free;
/// the purely imaginary slope psi2'(0) is root-solved so the accumulated
/// interior phase satisfies the two-point relation
///   arg psi2(a) - arg psi2(-a) = arg psi1(a) - arg psi1(-a) + pi
/// (phases taken as continuous functions along the integration, which makes
/// the admissible slope unique). |psi2(-a)| = |psi2(a)| holds by the PT
/// symmetry of the potential-free interior solution.
CoupledSystem build_single_unbound_feeder(const StationaryState& state, double psi2_at_0,
                                          const Grid& grid,
                                          const SingleFeederOptions& opts = {});

/// Deviation of the state from the bound-feeder condition: the interior
/// phase drop arg psi1(-a) - arg psi1(+a) must equal pi/2 for the mirror
/// ansatz psi2(x) = psi1(-x) to satisfy the two-point phase relation.
/// Returns the drop minus pi/2, wrapped to (-pi, pi]; zero means a bound
/// feeder exists. A real ground state (Gamma = 0) returns -pi/2.
double bound_feeder_phase_defect(const StationaryState& state);

/// Bound feeder psi2(x) = psi1(-x) with the global phase fixed by the
/// coupling conditions. Requires |bound_feeder_phase_defect| below `tol`.
CoupledSystem build_bound_feeder(const StationaryState& state, const Grid& grid,
                                 double tol = 1e-6);

struct LocusPoint {
  double g;
  double gamma;        ///< where the defect crosses zero on the ground branch
  double defect;       ///< residual defect after bisection
  double gamma_c;
  double gamma_c_star;
  bool dynamically_stable;  ///< gamma below gamma_c_star
};

/// For each g, bisect the bound-feeder phase defect along the ground branch
/// in gamma. Throws SolverError when some g has no sign change before the
/// branch terminates.
std::vector<LocusPoint> trace_psi_c_locus(double a, double V,
                                          std::span<const double> g_range,
                                          const Grid& grid,
                                          const SolverOptions& solver = {});

}  // namespace ptdelta
