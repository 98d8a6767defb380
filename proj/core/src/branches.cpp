#include "ptdelta/branches.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ptdelta/errors.hpp"

namespace ptdelta {

namespace {

BranchPoint make_point(double gamma, const ProbeResult& pr, const WellSystem& sys,
                       bool with_phase) {
  BranchPoint bp;
  bp.gamma = gamma;
  bp.mu = pr.mu;
  bp.residual = pr.residual;
  bp.value_left_well = pr.value_left_well;
  bp.value_right_well = pr.value_right_well;
  bp.params = pr.params;
  bp.window_left = pr.window_left;
  bp.phase_drop = with_phase ? interior_phase_drop(pr.mu, pr.params, pr.window_left, sys)
                             : 0.0;
  return bp;
}

bool acceptable_step(const ProbeResult& pr, Complex mu_prev, Branch branch,
                     const SolverOptions& solver, const ContinuationOptions& cont) {
  if (!pr.converged) return false;
  if (std::abs(pr.mu - mu_prev) > cont.mu_jump_guard * std::abs(mu_prev) + 0.02) {
    return false;  // basin hop to a different family member
  }
  const bool broken = branch == Branch::broken_plus || branch == Branch::broken_minus;
  if (!broken && std::abs(pr.mu.imag()) > 10.0 * solver.broken_im_threshold) {
    return false;  // real branch drifted complex
  }
  if (broken && std::abs(pr.mu.imag()) < 10.0 * solver.broken_im_threshold) {
    return false;  // broken branch collapsed onto the real one
  }
  return true;
}

}  // namespace

ContinuationSeed SpectrumBranch::seed_near(double gamma) const {
  if (points.empty()) {
    throw SolverError("spectrum branch: empty branch has no seeds");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (std::abs(points[i].gamma - gamma) < std::abs(points[best].gamma - gamma)) {
      best = i;
    }
  }
  return seed_at(best);
}

SpectrumBranch trace_branch(const StationaryState& seed,
                            std::span<const double> gamma_values, const Grid& grid,
                            const SolverOptions& solver, const ContinuationOptions& cont) {
  if (!(seed.residual < solver.tolerance * 1.01)) {
    throw SolverError("trace_branch: seed state is not converged");
  }
  SpectrumBranch out;
  out.branch = seed.branch;
  if (gamma_values.empty()) {
    return out;
  }

  SolverOptions probe_opts = solver;
  probe_opts.validate = false;

  WellSystem sys = seed.system;
  ContinuationSeed cur = to_seed(seed);
  double cur_gamma = seed.system.non_hermiticity;

  for (double target : gamma_values) {
    bool reached = true;
    while (std::abs(target - cur_gamma) > 1e-15) {
      const double dir = target > cur_gamma ? 1.0 : -1.0;
      double step = std::min(std::abs(target - cur_gamma), cont.max_step);
      ProbeResult pr;
      bool advanced = false;
      while (step >= cont.min_step) {
        sys.non_hermiticity = cur_gamma + dir * step;
        pr = probe_state(cur, sys, grid, probe_opts);
        if (acceptable_step(pr, cur.mu, out.branch, solver, cont)) {
          advanced = true;
          break;
        }
        step *= 0.5;
      }
      if (!advanced) {
        reached = false;
        break;
      }
      cur_gamma = sys.non_hermiticity;
      cur = {pr.mu, pr.params, pr.window_left, out.branch};
      if (std::abs(cur_gamma - target) <= 1e-15) {
        out.points.push_back(make_point(cur_gamma, pr, sys, cont.record_phase_drop));
      }
    }
    if (!reached) {
      break;  // branch ended before this target
    }
  }
  return out;
}

std::optional<StationaryState> seed_broken_state(const StationaryState& near_critical,
                                                 double gamma, const Grid& grid,
                                                 const SolverOptions& opts, int im_sign) {
  SolverOptions probe_opts = opts;
  probe_opts.validate = false;
  WellSystem sys = near_critical.system;
  sys.non_hermiticity = gamma;
  for (double im : {1e-3, 3e-3, 1e-2, 3e-2, 8e-2}) {
    for (double sign : {1.0, -1.0}) {
      if (im_sign != 0 && sign * im_sign < 0) continue;
      ContinuationSeed seed = to_seed(near_critical);
      seed.mu += Complex(0.0, sign * im);
      seed.params[1] = seed.mu.imag();
      seed.branch = sign > 0 ? Branch::broken_plus : Branch::broken_minus;
      const ProbeResult pr = probe_state(seed, sys, grid, probe_opts);
      if (!pr.converged || std::abs(pr.mu.imag()) < 100.0 * opts.broken_im_threshold) {
        continue;
      }
      if (im_sign != 0 && pr.mu.imag() * im_sign < 0) continue;
      const BranchHint hint =
          pr.mu.imag() > 0 ? BranchHint::broken_plus : BranchHint::broken_minus;
      return state_from_probe(pr, sys, grid, hint, probe_opts);
    }
  }
  return std::nullopt;
}

namespace {

/// March gamma upward from a seed until continuation fails; returns the last
/// good (gamma, seed) pair and the first failing gamma.
struct MarchResult {
  double gamma_good;
  double gamma_bad;
  ContinuationSeed seed;
};

MarchResult march_to_branch_end(const StationaryState& seed_state, const Grid& grid,
                                const CriticalSearchOptions& opts) {
  SolverOptions probe_opts = opts.solver;
  probe_opts.validate = false;
  ContinuationOptions cont;
  WellSystem sys = seed_state.system;
  ContinuationSeed cur = to_seed(seed_state);
  double gamma = sys.non_hermiticity;
  double step = 0.02;
  double first_bad = gamma + step;
  while (step >= 1e-7) {
    if (gamma + step > opts.gamma_max) {
      std::ostringstream msg;
      msg << "locate_critical: branches never merge below gamma_max = " << opts.gamma_max;
      throw SolverError(msg.str());
    }
    sys.non_hermiticity = gamma + step;
    const ProbeResult pr = probe_state(cur, sys, grid, probe_opts);
    if (acceptable_step(pr, cur.mu, cur.branch, opts.solver, cont)) {
      gamma = sys.non_hermiticity;
      cur = {pr.mu, pr.params, pr.window_left, cur.branch};
      step = std::min(step * 1.4, 0.02);
    } else {
      first_bad = gamma + step;
      step *= 0.5;
    }
  }
  return {gamma, first_bad, cur};
}

}  // namespace

CriticalPoints locate_critical(const StationaryState& ground_seed, const Grid& grid,
                               const CriticalSearchOptions& opts) {
  if (ground_seed.branch != Branch::ground) {
    throw SolverError("locate_critical: seed must lie on the ground branch");
  }
  SolverOptions probe_opts = opts.solver;
  probe_opts.validate = false;
  ContinuationOptions cont;

  // ---- gamma_c: bisection on real-branch existence ----
  MarchResult march = march_to_branch_end(ground_seed, grid, opts);
  double lo = march.gamma_good;
  double hi = std::max(march.gamma_bad, lo + 4.0 * opts.bracket_width);
  ContinuationSeed below = march.seed;
  WellSystem sys = ground_seed.system;
  while (hi - lo > opts.bracket_width) {
    const double mid = 0.5 * (lo + hi);
    sys.non_hermiticity = mid;
    const ProbeResult pr = probe_state(below, sys, grid, probe_opts);
    if (acceptable_step(pr, below.mu, Branch::ground, opts.solver, cont)) {
      lo = mid;
      below = {pr.mu, pr.params, pr.window_left, Branch::ground};
    } else {
      hi = mid;
    }
  }
  const double gamma_c = 0.5 * (lo + hi);

  // ---- gamma_c*: bisection on broken-branch existence ----
  WellSystem below_sys = ground_seed.system;
  below_sys.non_hermiticity = lo;
  SolverOptions state_opts = probe_opts;
  const StationaryState last_real = find_state_seeded(below, below_sys, grid, state_opts);

  std::optional<StationaryState> broken;
  for (double delta : {2e-3, 5e-3, 1e-2, 2e-2}) {
    broken = seed_broken_state(last_real, gamma_c + delta, grid, opts.solver);
    if (broken) break;
  }
  if (!broken) {
    throw SolverError("locate_critical: failed to seed the broken branch above gamma_c");
  }

  // march the broken branch downward until it collapses onto the real branch
  ContinuationSeed bcur = to_seed(*broken);
  double bgamma = broken->system.non_hermiticity;
  double bstep = 0.004;
  while (bstep >= 1e-7) {
    const double gnext = bgamma - bstep;
    if (gnext <= 0.0) break;
    sys.non_hermiticity = gnext;
    const ProbeResult pr = probe_state(bcur, sys, grid, probe_opts);
    if (acceptable_step(pr, bcur.mu, bcur.branch, opts.solver, cont)) {
      bgamma = gnext;
      bcur = {pr.mu, pr.params, pr.window_left, bcur.branch};
    } else {
      bstep *= 0.5;
    }
  }
  double blo = std::max(bgamma - 4.0 * opts.bracket_width, 0.0);
  double bhi = bgamma;
  // ensure blo really has no broken solution; widen downward otherwise
  while (blo > 0.0) {
    sys.non_hermiticity = blo;
    const ProbeResult pr = probe_state(bcur, sys, grid, probe_opts);
    if (!acceptable_step(pr, bcur.mu, bcur.branch, opts.solver, cont)) break;
    bhi = blo;
    bcur = {pr.mu, pr.params, pr.window_left, bcur.branch};
    blo -= 16.0 * opts.bracket_width;
  }
  while (bhi - blo > opts.bracket_width) {
    const double mid = 0.5 * (blo + bhi);
    sys.non_hermiticity = mid;
    const ProbeResult pr = probe_state(bcur, sys, grid, probe_opts);
    if (acceptable_step(pr, bcur.mu, bcur.branch, opts.solver, cont)) {
      bhi = mid;
      bcur = {pr.mu, pr.params, pr.window_left, bcur.branch};
    } else {
      blo = mid;
    }
  }
  const double gamma_c_star = 0.5 * (blo + bhi);

  if (gamma_c_star > gamma_c + 2.0 * opts.bracket_width) {
    std::ostringstream msg;
    msg << "locate_critical: ordering violated, gamma_c* = " << gamma_c_star
        << " > gamma_c = " << gamma_c;
    throw SolverError(msg.str());
  }
  return {gamma_c, gamma_c_star, opts.bracket_width};
}

double linear_hermitian_mu(double a, double V, Branch branch) {
  if (!(V < 0.0)) {
    throw DomainError("linear_hermitian_mu: requires attractive V < 0");
  }
  const bool even = branch == Branch::ground;
  if (!even && !(a * (-V) > 1.0)) {
    throw SolverError("linear_hermitian_mu: odd state does not exist for a|V| <= 1");
  }
  auto f = [&](double k) {
    const double t = std::exp(-2.0 * k * a);
    return even ? 2.0 * k + V * (1.0 + t) : 2.0 * k + V * (1.0 - t);
  };
  double lo = 1e-12, hi = std::max(1.0, -V) * 2.0;
  if (f(lo) * f(hi) > 0.0) {
    throw SolverError("linear_hermitian_mu: root not bracketed");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(lo) * f(mid) <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double kappa = 0.5 * (lo + hi);
  return -kappa * kappa;
}

StationaryState solve_by_continuation(const WellSystem& target, const Grid& grid,
                                      Branch branch, const SolverOptions& opts) {
  if (branch != Branch::ground && branch != Branch::excited) {
    throw SolverError("solve_by_continuation: only real branches can be seeded "
                      "from the linear Hermitian limit");
  }
  WellSystem sys = target;
  sys.non_hermiticity = 0.0;
  sys.nonlinearity = 0.0;
  const double mu_lin = linear_hermitian_mu(target.half_separation,
                                            target.well_strength, branch);
  SolverOptions stage = opts;
  stage.validate = false;
  const BranchHint hint = branch == Branch::ground ? BranchHint::ground
                                                   : BranchHint::excited;
  StationaryState state = find_state(sys, grid, mu_lin, hint, stage);

  // continue in g, then in gamma, with step halving
  auto continue_param = [&](double goal, auto set_param) -> void {
    double cur = 0.0;
    double step = 0.05;
    while (std::abs(goal - cur) > 1e-15) {
      const double dir = goal > cur ? 1.0 : -1.0;
      double s = std::min(step, std::abs(goal - cur));
      bool moved = false;
      while (s >= 1e-6) {
        WellSystem trial = state.system;
        set_param(trial, cur + dir * s);
        const ProbeResult pr = probe_state(to_seed(state), trial, grid, stage);
        if (pr.converged &&
            std::abs(pr.mu - state.mu) < 0.2 * std::abs(state.mu) + 0.05) {
          state = state_from_probe(pr, trial, grid, hint, stage);
          cur += dir * s;
          step = std::min(s * 1.5, 0.1);
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) {
        std::ostringstream msg;
        msg << "solve_by_continuation: stuck at intermediate parameter " << cur;
        throw SolverError(msg.str());
      }
    }
  };
  continue_param(target.nonlinearity,
                 [](WellSystem& w, double v) { w.nonlinearity = v; });
  continue_param(target.non_hermiticity,
                 [](WellSystem& w, double v) { w.non_hermiticity = v; });

  if (opts.validate) {
    // re-materialize with validation on
    return find_state_seeded(to_seed(state), state.system, grid, opts);
  }
  return state;
}

}  // namespace ptdelta
