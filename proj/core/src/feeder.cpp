#include "ptdelta/feeder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ptdelta/branches.hpp"
#include "ptdelta/errors.hpp"
#include "ptdelta/observables.hpp"
#include "ptdelta/shooting.hpp"
#include "ptdelta/soliton.hpp"

namespace ptdelta {

namespace {

using Cplx = std::complex<double>;
constexpr Cplx kI{0.0, 1.0};

double wrap_pi(double x) {
  while (x > M_PI) x -= 2.0 * M_PI;
  while (x <= -M_PI) x += 2.0 * M_PI;
  return x;
}

void require_real_converged(const StationaryState& state, const char* who) {
  if (!(state.residual < 1.0001e-9)) {
    throw SolverError(std::string(who) + ": state is not converged");
  }
  if (std::abs(state.mu.imag()) > 1e-9) {
    throw SolverError(std::string(who) +
                      ": state has complex mu; feeders require a PT-symmetric state");
  }
  if (!(state.system.nonlinearity > 0.0)) {
    throw SolverError(std::string(who) +
                      ": soliton-tail construction requires attractive g > 0");
  }
}

/// Fill a wave on the grid by integrating outward from anchor data in both
/// directions through the given spikes (bin-aligned sampling).
ComplexField render_wave(Cplx mu, double g, double x_anchor, ShootingState anchor,
                         std::span<const DeltaSpike> spikes, const Grid& grid) {
  const std::size_t n = grid.n_bins();
  std::vector<Cplx> vals(n);
  IntegrationOptions io;
  io.max_step = grid.dx();
  io.keep_nodes = false;
  io.overflow_limit = 1e12;
  auto advance = [&](double from, ShootingState y, double to) {
    return integrate_with_jumps(mu, g, from, y, spikes, to, io).end;
  };
  std::size_t i_anchor = 0;
  while (i_anchor + 1 < n && grid.x(i_anchor + 1) <= x_anchor) ++i_anchor;
  {
    ShootingState y = anchor;
    double x = x_anchor;
    for (std::size_t k = i_anchor + 1; k-- > 0;) {
      y = advance(x, y, grid.x(k));
      x = grid.x(k);
      vals[k] = y.value;
    }
  }
  {
    ShootingState y = anchor;
    double x = x_anchor;
    for (std::size_t k = i_anchor + 1; k < n; ++k) {
      y = advance(x, y, grid.x(k));
      x = grid.x(k);
      vals[k] = y.value;
    }
  }
  return ComplexField(grid, std::move(vals));
}

struct FeederLeg {
  ComplexField field;
  Cplx value_at_x0;
  Cplx slope_after_jump;
  double gamma;
};

/// Build one soliton-tail feeder: the vanishing side is the exact soliton
/// flank rising to `amplitude` at the coupling point (sampled in closed
/// form; outward integration would amplify roundoff along the growing
/// mode), the far side continues numerically through the effective delta of
/// strength V + gamma psi_sys/psi_env.
FeederLeg build_soliton_feeder(const StationaryState& state, double x0, Cplx psi_sys_x0,
                               double amplitude, double target_phase, const Grid& grid) {
  const double g = state.system.nonlinearity;
  const double V = state.system.well_strength;
  const double Gamma = state.system.non_hermiticity;
  const double kap = state.kappa();
  const SolitonParams sol{kap, soliton_peak_for_value(amplitude, kap, g, x0), g};
  const Cplx phase = std::polar(1.0, target_phase);
  const Cplx value = amplitude * phase;
  const double slope_mag =
      soliton_derivative_from_value(amplitude, sol, FlankSide::rising);
  const Cplx slope_before = slope_mag * phase;
  const double gamma = coupling_gamma(psi_sys_x0, value, Gamma);
  const Cplx strength = gamma > 0.0 ? V + gamma * psi_sys_x0 / value : Cplx(V, 0.0);
  const Cplx slope_after = slope_before + strength * value;

  const std::size_t n = grid.n_bins();
  std::vector<Cplx> vals(n);
  IntegrationOptions io;
  io.max_step = grid.dx();
  io.keep_nodes = false;
  std::size_t k = 0;
  for (; k < n && grid.x(k) <= x0; ++k) {
    vals[k] = phase * soliton_value(sol, grid.x(k));
  }
  ShootingState y{value, slope_after};
  double x = x0;
  for (; k < n; ++k) {
    y = integrate_with_jumps(state.mu, g, x, y, {}, grid.x(k), io).end;
    x = grid.x(k);
    vals[k] = y.value;
  }
  return {ComplexField(grid, std::move(vals)), value, slope_after, gamma};
}

double current_of(Cplx value, Cplx slope) {
  return 2.0 * std::imag(std::conj(value) * slope);
}

void check_coupling_invariants(CoupledSystem& sys, double Gamma, Cplx psi1_a,
                               Cplx psi1_ma, Cplx psi2_a, Cplx psi2_ma, double gamma_a,
                               double gamma_ma) {
  const double eq6_a = std::abs(kI * Gamma - gamma_a * psi2_a / psi1_a);
  const double eq6_ma = std::abs(-kI * Gamma - gamma_ma * psi2_ma / psi1_ma);
  sys.coupling_residual_max = std::max(eq6_a, eq6_ma);
  const double ph_a = std::abs(wrap_pi(std::arg(psi2_a) - std::arg(psi1_a))) - M_PI / 2;
  const double ph_ma =
      std::abs(wrap_pi(std::arg(psi2_ma) - std::arg(psi1_ma))) - M_PI / 2;
  sys.phase_residual_max = std::max(std::abs(ph_a), std::abs(ph_ma));
  if (Gamma > 0.0 && sys.coupling_residual_max >= 1e-8) {
    std::ostringstream msg;
    msg << "coupling condition residual " << sys.coupling_residual_max << " >= 1e-8";
    throw SolverError(msg.str());
  }
  if (Gamma > 0.0 && sys.phase_residual_max >= 1e-6) {
    std::ostringstream msg;
    msg << "phase relation residual " << sys.phase_residual_max << " >= 1e-6";
    throw SolverError(msg.str());
  }
}

}  // namespace

CoupledSystem build_two_feeder_system(const StationaryState& state,
                                      const TwoFeederChoice& amplitudes,
                                      const Grid& grid) {
  require_real_converged(state, "build_two_feeder_system");
  const double a = state.system.half_separation;
  const double V = state.system.well_strength;
  const double Gamma = state.system.non_hermiticity;
  const Cplx psi1_a = state.value_right_well;
  const Cplx psi1_ma = state.value_left_well;

  // psi2 feeds the source well at +a (phase +pi/2 ahead of psi1 there),
  // psi3 drains at -a (phase -pi/2 behind).
  FeederLeg leg2 = build_soliton_feeder(state, +a, psi1_a, amplitudes.psi2_at_a,
                                        std::arg(psi1_a) + M_PI / 2, grid);
  FeederLeg leg3 = build_soliton_feeder(state, -a, psi1_ma, amplitudes.psi3_at_minus_a,
                                        std::arg(psi1_ma) - M_PI / 2, grid);

  CoupledSystem sys;
  sys.mu = state.mu;
  sys.g = state.system.nonlinearity;
  sys.waves.push_back(state.field);
  sys.waves.push_back(std::move(leg2.field));
  sys.waves.push_back(std::move(leg3.field));
  sys.wells = {{{-a, V}, {+a, V}}, {{+a, V}}, {{-a, V}}};
  sys.couplings = {{+a, leg2.gamma, {0, 1}}, {-a, leg3.gamma, {0, 2}}};
  sys.unbound = {false, true, true};
  sys.gamma_tilde = leg3.gamma;
  sys.phase_defect = bound_feeder_phase_defect(state);

  check_coupling_invariants(sys, Gamma, psi1_a, psi1_ma, leg2.value_at_x0,
                            leg3.value_at_x0, leg2.gamma, leg3.gamma);
  // flux bookkeeping: psi2's inflow into +a against psi3's outflow at -a,
  // from the exact construction data (soliton sides carry no current)
  const double inflow = -current_of(leg2.value_at_x0, leg2.slope_after_jump);
  const double outflow = current_of(leg3.value_at_x0, leg3.slope_after_jump);
  sys.flux_imbalance = std::abs(inflow - outflow);
  if (sys.flux_imbalance >= 1e-6) {
    std::ostringstream msg;
    msg << "feeder flux imbalance " << sys.flux_imbalance << " >= 1e-6";
    throw SolverError(msg.str());
  }
  return sys;
}

namespace {

/// Interior phase of the potential-free solution with psi(0) = c (real) and
/// psi'(0) = i s, accumulated continuously from 0 to +a.
double interior_feeder_phase(Cplx mu, double g, double c, double s, double a,
                             Cplx* value_at_a = nullptr) {
  IntegrationOptions io;
  io.max_step = 0.005;
  io.keep_nodes = true;
  const Trajectory t =
      integrate_with_jumps(mu, g, 0.0, {Cplx(c, 0.0), kI * s}, {}, a, io);
  double acc = 0.0;
  double prev = 0.0;  // arg psi(0) = 0
  for (const TrajectoryNode& node : t.nodes) {
    const double ph = std::arg(node.value);
    acc += wrap_pi(ph - prev);
    prev = ph;
  }
  if (value_at_a != nullptr) *value_at_a = t.end.value;
  return acc;
}

}  // namespace

CoupledSystem build_single_unbound_feeder(const StationaryState& state, double psi2_at_0,
                                          const Grid& grid,
                                          const SingleFeederOptions& opts) {
  require_real_converged(state, "build_single_unbound_feeder");
  if (!(psi2_at_0 > 0.0)) {
    throw DomainError("build_single_unbound_feeder: psi2(0) must be positive");
  }
  const double a = state.system.half_separation;
  const double V = state.system.well_strength;
  const double Gamma = state.system.non_hermiticity;
  const double g = state.system.nonlinearity;
  const Cplx mu(state.mu.real(), 0.0);
  const double c = psi2_at_0;

  // two-point phase relation with continuously accumulated phases:
  //   2 theta2(a) = [arg psi1(a) - arg psi1(-a)] + pi
  const double d1 = -interior_phase_drop(state);
  const double target = d1 + M_PI;
  auto defect = [&](double s) { return 2.0 * interior_feeder_phase(mu, g, c, s, a) - target; };

  const double s_lo = opts.slope_scale_min * c;
  const double s_hi = opts.slope_scale_max * c;
  const double ratio = std::pow(s_hi / s_lo, 1.0 / (opts.scan_points - 1));
  double s_prev = s_lo;
  double d_prev = defect(s_prev);
  double root = -1.0;
  for (int i = 1; i < opts.scan_points; ++i) {
    const double s_next = s_lo * std::pow(ratio, i);
    const double d_next = defect(s_next);
    if (d_prev == 0.0) {
      root = s_prev;
      break;
    }
    if (d_prev * d_next < 0.0) {
      double lo = s_prev, hi = s_next, dlo = d_prev;
      while (hi - lo > opts.bisect_tol * (1.0 + hi)) {
        const double mid = 0.5 * (lo + hi);
        const double dm = defect(mid);
        if (dlo * dm <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          dlo = dm;
        }
      }
      root = 0.5 * (lo + hi);
      break;
    }
    s_prev = s_next;
    d_prev = d_next;
  }
  if (root < 0.0) {
    std::ostringstream msg;
    msg << "single feeder: no admissible psi2'(0) in [" << s_lo << ", " << s_hi
        << "] for psi2(0) = " << c;
    throw SolverError(msg.str());
  }

  // set the global phase so the +pi/2 relation holds at the source well
  Cplx psi2_a_raw;
  interior_feeder_phase(mu, g, c, root, a, &psi2_a_raw);
  const Cplx psi1_a = state.value_right_well;
  const Cplx psi1_ma = state.value_left_well;
  const double phi = std::arg(psi1_a) + M_PI / 2 - std::arg(psi2_a_raw);
  const Cplx rot = std::polar(1.0, phi);

  const Cplx psi2_a = psi2_a_raw * rot;
  const double gamma = coupling_gamma(psi1_a, psi2_a, Gamma);

  // the interior solution determines psi2(-a) = conj(psi2(a)) before rotation
  const Cplx psi2_ma = std::conj(psi2_a_raw) * rot;
  const DeltaSpike spikes[2] = {{-a, V + gamma * psi1_ma / psi2_ma},
                                {+a, V + gamma * psi1_a / psi2_a}};
  ComplexField field = render_wave(mu, g, 0.0, {c * rot, kI * root * rot},
                                   std::span<const DeltaSpike>(spikes, 2), grid);

  CoupledSystem sys;
  sys.mu = state.mu;
  sys.g = g;
  sys.waves.push_back(state.field);
  sys.waves.push_back(std::move(field));
  sys.wells = {{{-a, V}, {+a, V}}, {{-a, V}, {+a, V}}};
  sys.couplings = {{+a, gamma, {0, 1}}, {-a, gamma, {0, 1}}};
  sys.unbound = {false, true};
  sys.phase_defect = bound_feeder_phase_defect(state);

  if (std::abs(std::abs(psi2_ma) - std::abs(psi2_a)) >= 1e-6) {
    throw SolverError("single feeder: |psi2(-a)| != |psi2(a)|");
  }
  check_coupling_invariants(sys, Gamma, psi1_a, psi1_ma, psi2_a, psi2_ma, gamma, gamma);
  return sys;
}

double bound_feeder_phase_defect(const StationaryState& state) {
  return wrap_pi(interior_phase_drop(state) - M_PI / 2);
}

CoupledSystem build_bound_feeder(const StationaryState& state, const Grid& grid,
                                 double tol) {
  require_real_converged(state, "build_bound_feeder");
  const double defect = bound_feeder_phase_defect(state);
  if (std::abs(defect) > tol) {
    std::ostringstream msg;
    msg << "bound feeder: phase defect " << defect << " exceeds " << tol;
    throw SolverError(msg.str());
  }
  const double a = state.system.half_separation;
  const double V = state.system.well_strength;
  const double Gamma = state.system.non_hermiticity;
  const Cplx psi1_a = state.value_right_well;
  const Cplx psi1_ma = state.value_left_well;

  // psi2(x) = e^{i phi} psi1(-x); phi from the source-well phase relation
  ComplexField mirror = pt_reflect(state.field);
  // pt_reflect conjugates; undo the conjugation to get a plain mirror
  std::vector<Cplx> vals(mirror.size());
  for (std::size_t i = 0; i < mirror.size(); ++i) vals[i] = std::conj(mirror[i]);
  const Cplx psi2_a_raw = psi1_ma;  // mirror value at +a
  const double phi = std::arg(psi1_a) + M_PI / 2 - std::arg(psi2_a_raw);
  const Cplx rot = std::polar(1.0, phi);
  for (Cplx& v : vals) v *= rot;

  const Cplx psi2_a = psi2_a_raw * rot;
  const Cplx psi2_ma = psi1_a * rot;
  const double gamma = coupling_gamma(psi1_a, psi2_a, Gamma);

  CoupledSystem sys;
  sys.mu = state.mu;
  sys.g = state.system.nonlinearity;
  sys.waves.push_back(state.field);
  sys.waves.emplace_back(grid, std::move(vals));
  sys.wells = {{{-a, V}, {+a, V}}, {{-a, V}, {+a, V}}};
  sys.couplings = {{+a, gamma, {0, 1}}, {-a, gamma, {0, 1}}};
  sys.unbound = {false, false};
  sys.phase_defect = defect;
  check_coupling_invariants(sys, Gamma, psi1_a, psi1_ma, psi2_a, psi2_ma, gamma, gamma);
  return sys;
}

std::vector<LocusPoint> trace_psi_c_locus(double a, double V,
                                          std::span<const double> g_range,
                                          const Grid& grid, const SolverOptions& solver) {
  std::vector<LocusPoint> out;
  SolverOptions probe_opts = solver;
  probe_opts.validate = false;

  for (double g : g_range) {
    WellSystem base{a, V, 0.0, g};
    const StationaryState seed =
        solve_by_continuation(base, grid, Branch::ground, probe_opts);

    CriticalSearchOptions copts;
    copts.solver = probe_opts;
    const CriticalPoints crit = locate_critical(seed, grid, copts);

    // march along the branch watching the defect sign
    auto defect_of = [&](const ProbeResult& pr, const WellSystem& sys) {
      return wrap_pi(interior_phase_drop(pr.mu, pr.params, pr.window_left, sys) -
                     M_PI / 2);
    };
    WellSystem sys = base;
    ContinuationSeed cur = to_seed(seed);
    double gamma = 0.0;
    double d_cur = bound_feeder_phase_defect(seed);
    double step = 0.01;
    bool found = false;
    ContinuationOptions cont;
    while (step >= 1e-7 && !found) {
      const double gn = gamma + step;
      sys.non_hermiticity = gn;
      const ProbeResult pr = probe_state(cur, sys, grid, probe_opts);
      if (!pr.converged ||
          !(std::abs(pr.mu - cur.mu) < cont.mu_jump_guard * std::abs(cur.mu) + 0.02) ||
          std::abs(pr.mu.imag()) > 1e-8) {
        step *= 0.5;
        continue;
      }
      const double d_next = defect_of(pr, sys);
      if (d_cur < 0.0 && d_next >= 0.0 && std::abs(d_next - d_cur) < 1.0) {
        // bisect the crossing in gamma
        double lo = gamma, hi = gn, dlo = d_cur;
        ContinuationSeed lo_seed = cur;
        double defect_mid = d_next;
        double gamma_mid = gn;
        for (int it = 0; it < 60 && std::abs(defect_mid) > 1e-7; ++it) {
          gamma_mid = 0.5 * (lo + hi);
          sys.non_hermiticity = gamma_mid;
          const ProbeResult pm = probe_state(lo_seed, sys, grid, probe_opts);
          if (!pm.converged) break;
          defect_mid = defect_of(pm, sys);
          if (dlo * defect_mid <= 0.0) {
            hi = gamma_mid;
          } else {
            lo = gamma_mid;
            dlo = defect_mid;
            lo_seed = {pm.mu, pm.params, pm.window_left, Branch::ground};
          }
        }
        if (std::abs(defect_mid) >= 1e-6) {
          throw SolverError("psi_c locus: defect bisection stalled at g = " +
                            std::to_string(g));
        }
        out.push_back({g, gamma_mid, defect_mid, crit.gamma_c, crit.gamma_c_star,
                       gamma_mid < crit.gamma_c_star});
        found = true;
        break;
      }
      gamma = gn;
      cur = {pr.mu, pr.params, pr.window_left, Branch::ground};
      d_cur = d_next;
    }
    if (!found) {
      std::ostringstream msg;
      msg << "psi_c locus: no defect root on the ground branch at g = " << g
          << " (branch ends near gamma = " << gamma << " with defect " << d_cur << ")";
      throw SolverError(msg.str());
    }
  }
  return out;
}

}  // namespace ptdelta
