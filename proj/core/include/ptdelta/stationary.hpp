#pragma once

#include <array>
#include <complex>

#include "ptdelta/complex_field.hpp"
#include "ptdelta/grid.hpp"
#include "ptdelta/well_system.hpp"

namespace ptdelta {

/// kappa = sqrt(-mu), principal branch (Re kappa > 0 for bound states).
/// Both tails of a bound state decay at rate Re kappa; for the bright
/// soliton kappa^2 = -mu exactly.
inline Complex kappa_of(Complex mu) { return std::sqrt(-mu); }

enum class Branch { ground, excited, broken_plus, broken_minus };
enum class BranchHint { automatic, ground, excited, broken_plus, broken_minus };

const char* branch_name(Branch b);
BranchHint hint_for(Branch b);

struct SolverOptions {
  double tolerance = 1e-9;        ///< Newton convergence, l2 norm of residual
  int max_iterations = 100;
  double fd_step = 1e-7;          ///< forward-difference Jacobian step scale
  double pin_amplitude = 0.5;     ///< family selector, see shoot_residual notes
  double overflow_limit = 1e12;
  double penalty = 1e6;           ///< residual value assigned to divergent shots
  double tail_margin_min = 3.0;
  double tail_margin_factor = 4.0;  ///< margin = factor / Re kappa (clamped)
  double step = 0.0;                ///< RK4 step, 0 = reporting-grid dx
  double broken_im_threshold = 1e-9;
  bool validate = true;             ///< enforce StationaryState invariants
};

/// Frozen context of one boundary-value solve. The shooting window
/// [x_left, x_right] brackets both wells with a tail margin on each side.
struct ShootSetup {
  WellSystem system;
  double x_left;
  double x_right;
  double step;
  double pin_amplitude;
  double overflow_limit = 1e12;
  double penalty = 1e6;
};

/// Residual of the matching formulation. Free parameters:
///   p[0], p[1]  Re mu, Im mu
///   p[2], p[3]  Re psi, Im psi at x_left
///   p[4], p[5]  Re psi', Im psi' at x_left
/// The shot integrates from x_left through both deltas to x_right (RK4 with
/// jump conditions). With kappa = sqrt(-mu) and the free-tail slope factor
/// q(v) = sqrt(1 - g|v|^2 / (2 kappa^2)) the six components are
///   r[0]+i r[1]  left-tail consistency   psi'/(kappa psi) - q(psi)   at x_left
///   r[2]         scale pin   (|psi(-a)| |psi(+a)| - A^2) / A^2
///   r[3]         phase gauge  Im psi(-a) / A
///   r[4]+i r[5]  right-tail decay: growing-mode coefficient
///                (psi'/kappa + q(psi) psi) / (2 A exp(-Re kappa (x_right - a)))
/// For real mu the tail conditions are exact at any point beyond the outer
/// delta (the decaying solution there is the bright soliton, whose slope is a
/// function of its value), so the window size costs no accuracy. The scale
/// pin fixes the geometric mean of the two delta-point amplitudes; it is
/// invariant under PT reflection, which keeps broken-branch solutions in
/// conjugate pairs within the pinned family. The stationary family is
/// otherwise continuous (no normalization is imposed anywhere); the pin
/// amplitude selects the member. Divergent or degenerate shots map to a
/// large finite penalty so the Newton line search stays functional.
std::array<double, 6> shoot_residual(const std::array<double, 6>& params,
                                     const ShootSetup& setup);

struct StationaryState {
  WellSystem system;
  Complex mu;
  ComplexField field;
  Branch branch;
  double residual;          ///< l2 norm of the converged shoot_residual
  Complex value_left_well;  ///< psi(-a), exact trajectory checkpoint
  Complex value_right_well;
  std::array<double, 6> shoot_params;
  double window_left;
  double window_right;

  double kappa() const { return std::real(kappa_of(mu)); }
  bool is_broken() const {
    return branch == Branch::broken_plus || branch == Branch::broken_minus;
  }
};

/// What continuation needs to re-seed a solve: boundary data plus where it
/// lives. Cheap to copy around, unlike a full state with its field.
struct ContinuationSeed {
  Complex mu;
  std::array<double, 6> params;
  double window_left;
  Branch branch;
};

ContinuationSeed to_seed(const StationaryState& state);

/// Newton outcome without the rendered field; used by branch tracing and
/// bisection probes where only mu and the boundary data matter.
struct ProbeResult {
  bool converged = false;
  Complex mu;
  double residual = 0.0;
  std::array<double, 6> params{};
  double window_left = 0.0;
  double window_right = 0.0;
  Complex value_left_well;
  Complex value_right_well;
};

/// Damped Newton iteration on shoot_residual with a forward-difference
/// Jacobian. Throws SolverError on non-convergence or (when opts.validate)
/// on invariant violations of the converged state.
StationaryState find_state(const WellSystem& system, const Grid& grid, Complex mu_guess,
                           BranchHint hint = BranchHint::automatic,
                           const SolverOptions& opts = {});

/// Continuation step: re-solve at `system` seeded from previously converged
/// boundary data, translated to the new shooting window along the
/// potential-free tail.
StationaryState find_state_seeded(const ContinuationSeed& seed, const WellSystem& system,
                                  const Grid& grid, const SolverOptions& opts = {});

/// Same continuation step, but stops after Newton: no field render, no
/// invariant check, never throws on non-convergence.
ProbeResult probe_state(const ContinuationSeed& seed, const WellSystem& system,
                        const Grid& grid, const SolverOptions& opts = {});

/// Materialize the full state from a converged probe.
StationaryState state_from_probe(const ProbeResult& probe, const WellSystem& system,
                                 const Grid& grid, BranchHint hint,
                                 const SolverOptions& opts = {});

/// Phase difference arg psi(-a) - arg psi(+a) accumulated continuously along
/// the integrated trajectory between the wells (positive for the ground
/// family: the particle current runs from the source well at +a to the drain
/// at -a, so the phase decreases left to right).
double interior_phase_drop(const StationaryState& state);
double interior_phase_drop(Complex mu, const std::array<double, 6>& params,
                           double window_left, const WellSystem& system);

}  // namespace ptdelta
