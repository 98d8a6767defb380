#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ptdelta/stationary.hpp"

namespace ptdelta {

struct BranchPoint {
  double gamma;
  Complex mu;
  double residual;
  double phase_drop;  ///< arg psi(-a) - arg psi(+a), continuous along the shot
  Complex value_left_well;
  Complex value_right_well;
  std::array<double, 6> params;
  double window_left;
};

struct SpectrumBranch {
  Branch branch;
  std::vector<BranchPoint> points;  ///< at strictly monotone gamma values

  ContinuationSeed seed_at(std::size_t i) const {
    const BranchPoint& p = points[i];
    return {p.mu, p.params, p.window_left, branch};
  }
  /// Seed whose gamma is closest to `gamma`.
  ContinuationSeed seed_near(double gamma) const;
};

struct ContinuationOptions {
  double min_step = 1e-6;    ///< step halving floor before declaring branch end
  double max_step = 0.02;    ///< internal stepping between requested points
  double mu_jump_guard = 0.15;  ///< reject steps where mu moves more than this
  bool record_phase_drop = true;
};

/// Natural-parameter continuation from a converged seed state through the
/// requested gamma values (increasing or decreasing). Internal steps halve
/// near non-convergence down to min_step before the branch is declared
/// ended, so the returned points may stop short of the requested range.
SpectrumBranch trace_branch(const StationaryState& seed,
                            std::span<const double> gamma_values, const Grid& grid,
                            const SolverOptions& solver = {},
                            const ContinuationOptions& cont = {});

struct CriticalPoints {
  double gamma_c;       ///< real branches terminate here (exceptional point)
  double gamma_c_star;  ///< PT-broken pair exists for gamma above this
  double bracket_width;
};

struct CriticalSearchOptions {
  double bracket_width = 1e-5;
  double gamma_max = 2.0;  ///< marching cap; bracket-failure beyond this
  SolverOptions solver{};
};

/// March the ground branch up in gamma until continuation fails, bisect on
/// real-branch existence to locate gamma_c, then seed the broken pair just
/// above gamma_c and bisect on broken-branch existence for gamma_c_star.
/// Enforces gamma_c_star <= gamma_c + bracket tolerance.
CriticalPoints locate_critical(const StationaryState& ground_seed, const Grid& grid,
                               const CriticalSearchOptions& opts = {});

/// Find a PT-broken solution at `gamma`, seeded from a real state near the
/// branch end. im_sign selects the Im mu > 0 or < 0 partner (0 accepts
/// either). Returns std::nullopt when no broken solution is found.
std::optional<StationaryState> seed_broken_state(const StationaryState& near_critical,
                                                 double gamma, const Grid& grid,
                                                 const SolverOptions& opts = {},
                                                 int im_sign = 0);

/// Chemical potentials of the linear (g = 0) Hermitian double well,
///   kappa (1 + tanh(kappa a)) = -V   (ground, even)
///   kappa (1 + coth(kappa a)) = -V   (excited, odd; exists for a|V| > 1),
/// solved by bisection. Used to seed continuation from the analytic corner
/// of parameter space.
double linear_hermitian_mu(double a, double V, Branch branch);

/// Convenience seeding ladder: solve the linear Hermitian problem, then
/// continue in g and finally in gamma to the requested system.
StationaryState solve_by_continuation(const WellSystem& target, const Grid& grid,
                                      Branch branch, const SolverOptions& opts = {});

}  // namespace ptdelta
