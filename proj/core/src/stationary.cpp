#include "ptdelta/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ptdelta/errors.hpp"
#include "ptdelta/shooting.hpp"

namespace ptdelta {

namespace {

using Cplx = std::complex<double>;
using Params = std::array<double, 6>;
using Residual = std::array<double, 6>;

double l2(const Residual& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s);
}

/// Gaussian elimination with partial pivoting on the 6x6 Newton system.
bool solve6(std::array<std::array<double, 6>, 6> m, Residual rhs, Params& out) {
  constexpr int n = 6;
  std::array<int, n> perm{0, 1, 2, 3, 4, 5};
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(m[perm[r]][col]) > std::abs(m[perm[piv]][col])) piv = r;
    }
    std::swap(perm[col], perm[piv]);
    const double d = m[perm[col]][col];
    if (std::abs(d) < 1e-300) return false;
    for (int r = col + 1; r < n; ++r) {
      const double f = m[perm[r]][col] / d;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) m[perm[r]][c] -= f * m[perm[col]][c];
      rhs[perm[r]] -= f * rhs[perm[col]];
    }
  }
  for (int row = n - 1; row >= 0; --row) {
    double s = rhs[perm[row]];
    for (int c = row + 1; c < n; ++c) s -= m[perm[row]][c] * out[c];
    out[row] = s / m[perm[row]][row];
  }
  return true;
}

Cplx tail_slope_factor(Cplx v, double g, Cplx kappa) {
  return std::sqrt(1.0 - g * std::norm(v) / (2.0 * kappa * kappa));
}

struct ShotCheckpoints {
  Cplx psi_left_well;   // psi(-a)
  Cplx psi_right_well;  // psi(+a)
  Cplx psi_end;
  Cplx dpsi_end;
};

ShotCheckpoints run_shot(const Params& p, const ShootSetup& s) {
  const Cplx mu(p[0], p[1]);
  const ShootingState y0{{p[2], p[3]}, {p[4], p[5]}};
  const auto spikes = s.system.delta_spikes();
  IntegrationOptions io;
  io.max_step = s.step;
  io.overflow_limit = s.overflow_limit;
  io.keep_nodes = false;
  const Trajectory t = integrate_with_jumps(mu, s.system.nonlinearity, s.x_left, y0,
                                            spikes, s.x_right, io);
  if (t.jumps.size() != 2) {
    throw DomainError("shoot: window does not bracket both wells");
  }
  return {t.jumps[0].value, t.jumps[1].value, t.end.value, t.end.slope};
}

Residual penalty_residual(double penalty) {
  Residual r;
  r.fill(penalty);
  return r;
}

struct NewtonResult {
  Params params;
  double residual_norm;
  bool converged;
};

NewtonResult newton(Params p, const ShootSetup& setup, const SolverOptions& opts) {
  Residual r = shoot_residual(p, setup);
  double rn = l2(r);
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (rn < opts.tolerance) {
      return {p, rn, true};
    }
    std::array<std::array<double, 6>, 6> jac{};
    for (int j = 0; j < 6; ++j) {
      const double h = opts.fd_step * (1.0 + std::abs(p[j]));
      Params ph = p;
      ph[j] += h;
      const Residual rh = shoot_residual(ph, setup);
      for (int i = 0; i < 6; ++i) jac[i][j] = (rh[i] - r[i]) / h;
    }
    Residual rhs;
    for (int i = 0; i < 6; ++i) rhs[i] = -r[i];
    Params dp{};
    if (!solve6(jac, rhs, dp)) {
      return {p, rn, false};
    }
    double alpha = 1.0;
    bool moved = false;
    for (int k = 0; k < 30; ++k) {
      Params pn;
      for (int i = 0; i < 6; ++i) pn[i] = p[i] + alpha * dp[i];
      const Residual rnew = shoot_residual(pn, setup);
      const double rnn = l2(rnew);
      if (rnn < (1.0 - 1e-4 * alpha) * rn) {
        p = pn;
        r = rnew;
        rn = rnn;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      return {p, rn, rn < opts.tolerance};
    }
  }
  return {p, rn, rn < opts.tolerance};
}

ShootSetup make_setup(const WellSystem& system, const Grid& grid, Cplx mu_guess,
                      const SolverOptions& opts) {
  system.validate();
  const double a = system.half_separation;
  const double kap = std::max(kappa_of(mu_guess).real(), 0.02);
  const double edge = std::min(-grid.x_min(), grid.x_max()) - a - 1.0;
  if (edge <= 0.5) {
    throw DomainError("find_state: grid too small to bracket the wells");
  }
  const double margin =
      std::min(std::max(opts.tail_margin_factor / kap, opts.tail_margin_min), edge);
  ShootSetup s;
  s.system = system;
  s.x_left = -a - margin;
  s.x_right = a + margin;
  s.step = opts.step > 0.0 ? opts.step : grid.dx();
  s.pin_amplitude = opts.pin_amplitude;
  s.overflow_limit = opts.overflow_limit;
  s.penalty = opts.penalty;
  return s;
}

/// Left-tail boundary data for a soliton flank passing through amplitude A
/// at the left well (plain exponential tail in the linear case).
Params seed_params(Cplx mu, const WellSystem& system, double A, double x_left) {
  const double g = system.nonlinearity;
  const double a = system.half_separation;
  const Cplx kappa = kappa_of(mu);
  Cplx psi0;
  const double peak = g > 0.0 ? std::sqrt(2.0) * std::abs(kappa) / std::sqrt(g) : 0.0;
  if (g > 0.0 && A < peak) {
    const double shift = std::acosh(peak / A) / kappa.real();
    psi0 = std::sqrt(2.0 * kappa * kappa / g) / std::cosh(kappa * (x_left + a - shift));
  } else {
    psi0 = A * std::exp(kappa * (x_left + a));
  }
  const Cplx dpsi0 = kappa * psi0 * tail_slope_factor(psi0, g, kappa);
  return {mu.real(), mu.imag(), psi0.real(), psi0.imag(), dpsi0.real(), dpsi0.imag()};
}

/// Sample the converged shot on the reporting grid. Outside the shooting
/// window the tails are evaluated in closed form (the soliton flank for the
/// real nonlinear branches, the plain exponential otherwise): integrating
/// outward would amplify roundoff along the growing mode, which matters on
/// wide grids where the outer stretch spans many decay lengths.
ComplexField render_field(const Params& p, const ShootSetup& s, const Grid& grid) {
  const Cplx mu(p[0], p[1]);
  const double g = s.system.nonlinearity;
  const Cplx kappa = kappa_of(mu);
  const auto spikes = s.system.delta_spikes();
  const std::size_t n = grid.n_bins();
  std::vector<Cplx> vals(n);

  IntegrationOptions io;
  io.max_step = s.step;
  io.overflow_limit = s.overflow_limit;
  io.keep_nodes = false;

  auto advance = [&](double from, ShootingState y, double to) {
    return integrate_with_jumps(mu, g, from, y, spikes, to, io).end;
  };

  const bool soliton_tail = g > 0.0 && std::abs(mu.imag()) < 1e-9;
  // value at distance `dist` outward of a window edge with boundary value v0
  auto tail_value = [&](Cplx v0, double dist) -> Cplx {
    if (soliton_tail) {
      const double kap = kappa.real();
      const double peak = std::sqrt(2.0) * kap / std::sqrt(g);
      const double mag = std::abs(v0);
      if (mag < peak) {
        const double s0 = std::acosh(peak / mag) / kap;
        return (v0 / mag) * (peak / std::cosh(kap * (dist + s0)));
      }
    }
    return v0 * std::exp(-kappa * dist);
  };

  std::size_t i_left = 0;  // last bin at or left of the window start
  while (i_left + 1 < n && grid.x(i_left + 1) <= s.x_left) ++i_left;

  const Cplx psi0(p[2], p[3]);
  for (std::size_t k = 0; k <= i_left; ++k) {
    vals[k] = tail_value(psi0, s.x_left - grid.x(k));
  }
  {
    ShootingState y{psi0, {p[4], p[5]}};
    double x = s.x_left;
    std::size_t k = i_left + 1;
    for (; k < n && grid.x(k) < s.x_right; ++k) {
      y = advance(x, y, grid.x(k));
      x = grid.x(k);
      vals[k] = y.value;
    }
    const Cplx v_right = advance(x, y, s.x_right).value;
    for (; k < n; ++k) {
      vals[k] = tail_value(v_right, grid.x(k) - s.x_right);
    }
  }
  return ComplexField(grid, std::move(vals));
}

Branch classify(const Params& p, const ShootSetup& s, const ComplexField& field,
                BranchHint hint, const SolverOptions& opts) {
  const Cplx mu(p[0], p[1]);
  if (std::abs(mu.imag()) > opts.broken_im_threshold) {
    return mu.imag() > 0.0 ? Branch::broken_plus : Branch::broken_minus;
  }
  switch (hint) {
    case BranchHint::ground: return Branch::ground;
    case BranchHint::excited: return Branch::excited;
    case BranchHint::broken_plus: return Branch::broken_plus;
    case BranchHint::broken_minus: return Branch::broken_minus;
    case BranchHint::automatic: break;
  }
  // node count of |psi| between the wells: 0 -> ground, 1 -> excited
  const double a = s.system.half_separation;
  const Grid& grid = field.grid();
  double max_abs = 0.0;
  for (std::size_t i = 0; i < grid.n_bins(); ++i) {
    if (std::abs(grid.x(i)) <= a) max_abs = std::max(max_abs, std::abs(field[i]));
  }
  int nodes = 0;
  for (std::size_t i = 1; i + 1 < grid.n_bins(); ++i) {
    if (std::abs(grid.x(i)) >= a - 2.0 * grid.dx()) continue;
    const double v = std::abs(field[i]);
    if (v < std::abs(field[i - 1]) && v <= std::abs(field[i + 1]) && v < 0.5 * max_abs) {
      ++nodes;
    }
  }
  return nodes == 0 ? Branch::ground : Branch::excited;
}

void validate_state(const StationaryState& st) {
  std::ostringstream why;
  if (!(st.residual < 1.0001e-9)) {
    why << "residual " << st.residual << " >= 1e-9; ";
  }
  const ComplexField& f = st.field;
  const double peak = f.max_abs();
  const std::size_t n = f.grid().n_bins();
  if (std::abs(f[0]) >= 1e-8 * peak || std::abs(f[n - 1]) >= 1e-8 * peak) {
    why << "field does not decay at the grid ends (|psi(edge)|/max = "
        << std::max(std::abs(f[0]), std::abs(f[n - 1])) / peak << "); ";
  }
  if (!st.is_broken()) {
    if (std::abs(st.mu.imag()) >= 1e-9) {
      why << "Im mu = " << st.mu.imag() << " on a real branch; ";
    }
    double dev = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      dev = std::max(dev, std::abs(std::norm(f[i]) - std::norm(f[n - i])));
    }
    if (dev >= 1e-6 * peak * peak) {
      why << "|psi|^2 not PT-symmetric (max deviation " << dev / (peak * peak) << "); ";
    }
  }
  const std::string msg = why.str();
  if (!msg.empty()) {
    throw SolverError("stationary state invariant violation: " + msg);
  }
}

StationaryState build_state(const NewtonResult& nr, const ShootSetup& setup,
                            const Grid& grid, BranchHint hint, const SolverOptions& opts) {
  if (!nr.converged) {
    std::ostringstream msg;
    msg << "find_state: no convergence (residual " << nr.residual_norm << " at mu = "
        << nr.params[0] << (nr.params[1] < 0 ? " - " : " + ") << std::abs(nr.params[1])
        << "i)";
    throw SolverError(msg.str());
  }
  const ShotCheckpoints cp = run_shot(nr.params, setup);
  ComplexField field = render_field(nr.params, setup, grid);
  const Branch branch = classify(nr.params, setup, field, hint, opts);
  StationaryState st{setup.system,
                     Cplx(nr.params[0], nr.params[1]),
                     std::move(field),
                     branch,
                     nr.residual_norm,
                     cp.psi_left_well,
                     cp.psi_right_well,
                     nr.params,
                     setup.x_left,
                     setup.x_right};
  if (opts.validate) {
    validate_state(st);
  }
  return st;
}

Params translate_seed(const ContinuationSeed& seed, const WellSystem& system,
                      const ShootSetup& setup, const SolverOptions& opts) {
  Params p = seed.params;
  const double shift = setup.x_left - seed.window_left;
  if (std::abs(shift) > 1e-12) {
    const Cplx mu(p[0], p[1]);
    IntegrationOptions io;
    io.max_step = setup.step;
    io.overflow_limit = opts.overflow_limit;
    io.keep_nodes = false;
    const ShootingState y0{{p[2], p[3]}, {p[4], p[5]}};
    const ShootingState y1 =
        integrate_with_jumps(mu, system.nonlinearity, seed.window_left, y0, {},
                             setup.x_left, io)
            .end;
    p[2] = y1.value.real();
    p[3] = y1.value.imag();
    p[4] = y1.slope.real();
    p[5] = y1.slope.imag();
  }
  return p;
}

}  // namespace

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::ground: return "ground";
    case Branch::excited: return "excited";
    case Branch::broken_plus: return "broken_plus";
    case Branch::broken_minus: return "broken_minus";
  }
  return "?";
}

BranchHint hint_for(Branch b) {
  switch (b) {
    case Branch::ground: return BranchHint::ground;
    case Branch::excited: return BranchHint::excited;
    case Branch::broken_plus: return BranchHint::broken_plus;
    case Branch::broken_minus: return BranchHint::broken_minus;
  }
  return BranchHint::automatic;
}

std::array<double, 6> shoot_residual(const Params& params, const ShootSetup& setup) {
  const Cplx mu(params[0], params[1]);
  if (!(mu.real() < 0.0)) {
    return penalty_residual(setup.penalty);
  }
  const double g = setup.system.nonlinearity;
  const double A = setup.pin_amplitude;
  const Cplx kappa = kappa_of(mu);
  const Cplx psi0(params[2], params[3]);
  const Cplx dpsi0(params[4], params[5]);
  if (std::abs(psi0) < 1e-300) {
    return penalty_residual(setup.penalty);
  }

  ShotCheckpoints cp;
  try {
    cp = run_shot(params, setup);
  } catch (const OverflowError&) {
    return penalty_residual(setup.penalty);
  }

  const Cplx left = dpsi0 / (kappa * psi0) - tail_slope_factor(psi0, g, kappa);
  const double tail_scale =
      2.0 * A * std::exp(-kappa.real() * (setup.x_right - setup.system.half_separation));
  const Cplx right =
      (cp.dpsi_end / kappa + tail_slope_factor(cp.psi_end, g, kappa) * cp.psi_end) /
      tail_scale;

  Residual r{left.real(),
             left.imag(),
             (std::abs(cp.psi_left_well) * std::abs(cp.psi_right_well) - A * A) / (A * A),
             cp.psi_left_well.imag() / A,
             right.real(),
             right.imag()};
  for (double v : r) {
    if (!std::isfinite(v)) return penalty_residual(setup.penalty);
  }
  return r;
}

ContinuationSeed to_seed(const StationaryState& state) {
  return {state.mu, state.shoot_params, state.window_left, state.branch};
}

StationaryState find_state(const WellSystem& system, const Grid& grid, Complex mu_guess,
                           BranchHint hint, const SolverOptions& opts) {
  if (!(mu_guess.real() < 0.0)) {
    throw DomainError("find_state: mu guess must have Re mu < 0 (bound-state range)");
  }
  const ShootSetup setup = make_setup(system, grid, mu_guess, opts);
  const Params seed = seed_params(mu_guess, system, opts.pin_amplitude, setup.x_left);
  return build_state(newton(seed, setup, opts), setup, grid, hint, opts);
}

StationaryState find_state_seeded(const ContinuationSeed& seed, const WellSystem& system,
                                  const Grid& grid, const SolverOptions& opts) {
  const ShootSetup setup = make_setup(system, grid, seed.mu, opts);
  const Params p0 = translate_seed(seed, system, setup, opts);
  return build_state(newton(p0, setup, opts), setup, grid, hint_for(seed.branch), opts);
}

ProbeResult probe_state(const ContinuationSeed& seed, const WellSystem& system,
                        const Grid& grid, const SolverOptions& opts) {
  const ShootSetup setup = make_setup(system, grid, seed.mu, opts);
  const Params p0 = translate_seed(seed, system, setup, opts);
  const NewtonResult nr = newton(p0, setup, opts);
  ProbeResult pr;
  pr.converged = nr.converged;
  pr.mu = Cplx(nr.params[0], nr.params[1]);
  pr.residual = nr.residual_norm;
  pr.params = nr.params;
  pr.window_left = setup.x_left;
  pr.window_right = setup.x_right;
  if (nr.converged) {
    const ShotCheckpoints cp = run_shot(nr.params, setup);
    pr.value_left_well = cp.psi_left_well;
    pr.value_right_well = cp.psi_right_well;
  }
  return pr;
}

StationaryState state_from_probe(const ProbeResult& probe, const WellSystem& system,
                                 const Grid& grid, BranchHint hint,
                                 const SolverOptions& opts) {
  if (!probe.converged) {
    throw SolverError("state_from_probe: probe did not converge");
  }
  ShootSetup setup = make_setup(system, grid, probe.mu, opts);
  setup.x_left = probe.window_left;  // params are tied to the probe's window
  setup.x_right = probe.window_right;
  return build_state({probe.params, probe.residual, true}, setup, grid, hint, opts);
}

double interior_phase_drop(Complex mu, const std::array<double, 6>& params,
                           double window_left, const WellSystem& system) {
  const auto spikes = system.delta_spikes();
  IntegrationOptions io;
  io.max_step = 0.01;
  io.keep_nodes = true;
  const ShootingState y0{{params[2], params[3]}, {params[4], params[5]}};
  const Trajectory t = integrate_with_jumps(mu, system.nonlinearity, window_left, y0,
                                            spikes, system.half_separation, io);
  double drop = 0.0;
  bool inside = false;
  double prev = 0.0;
  for (const TrajectoryNode& node : t.nodes) {
    const double ph = std::arg(node.value);
    if (!inside) {
      if (node.x >= -system.half_separation - 1e-12) {
        inside = true;
        prev = ph;
      }
      continue;
    }
    double d = ph - prev;
    while (d > M_PI) d -= 2.0 * M_PI;
    while (d <= -M_PI) d += 2.0 * M_PI;
    drop += d;
    prev = ph;
  }
  return -drop;  // arg psi(-a) - arg psi(+a)
}

double interior_phase_drop(const StationaryState& state) {
  return interior_phase_drop(state.mu, state.shoot_params, state.window_left,
                             state.system);
}

}  // namespace ptdelta
