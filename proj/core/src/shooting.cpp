#include "ptdelta/shooting.hpp"

#include <algorithm>
#include <cmath>

#include "ptdelta/errors.hpp"

namespace ptdelta {

namespace {

using Cplx = std::complex<double>;

inline void rk4_step(Cplx mu, double g, double h, Cplx& psi, Cplx& dpsi) {
  auto accel = [mu, g](const Cplx& p) { return -(mu + g * std::norm(p)) * p; };
  const Cplx k1p = dpsi, k1d = accel(psi);
  const Cplx k2p = dpsi + 0.5 * h * k1d, k2d = accel(psi + 0.5 * h * k1p);
  const Cplx k3p = dpsi + 0.5 * h * k2d, k3d = accel(psi + 0.5 * h * k2p);
  const Cplx k4p = dpsi + h * k3d, k4d = accel(psi + h * k3p);
  psi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  dpsi += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
}

}  // namespace

Cplx Trajectory::value_near(double x) const {
  if (nodes.empty()) {
    throw DomainError("trajectory: no nodes recorded");
  }
  const auto it = std::min_element(nodes.begin(), nodes.end(),
                                   [x](const TrajectoryNode& a, const TrajectoryNode& b) {
                                     return std::abs(a.x - x) < std::abs(b.x - x);
                                   });
  return it->value;
}

Trajectory integrate_with_jumps(Cplx mu, double g, double x_start, ShootingState y0,
                                std::span<const DeltaSpike> deltas, double x_end,
                                const IntegrationOptions& opts) {
  const double dir = x_end >= x_start ? 1.0 : -1.0;
  const double span = std::abs(x_end - x_start);

  // Spike positions strictly inside the span, ordered along the direction
  // of travel. A spike at the start point is considered already crossed.
  std::vector<DeltaSpike> inside;
  for (const DeltaSpike& d : deltas) {
    const double s = dir * (d.position - x_start);
    if (s > 1e-14 && s <= span + 1e-14) inside.push_back(d);
  }
  std::sort(inside.begin(), inside.end(), [dir](const DeltaSpike& a, const DeltaSpike& b) {
    return dir * a.position < dir * b.position;
  });

  Trajectory traj;
  Cplx psi = y0.value;
  Cplx dpsi = y0.slope;
  double x = x_start;
  if (opts.keep_nodes) traj.nodes.push_back({x, psi, dpsi});

  auto run_to = [&](double target) {
    const double seg = std::abs(target - x);
    if (seg < 1e-15) {
      x = target;
      return;
    }
    const auto n = static_cast<std::size_t>(std::ceil(seg / opts.max_step - 1e-12));
    const double h = dir * seg / static_cast<double>(std::max<std::size_t>(n, 1));
    for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i) {
      rk4_step(mu, g, h, psi, dpsi);
      x += h;
      if (std::abs(psi) > opts.overflow_limit) {
        throw OverflowError(x);
      }
      if (opts.keep_nodes) traj.nodes.push_back({x, psi, dpsi});
    }
    x = target;  // absorb accumulated rounding in the node position
    if (opts.keep_nodes) traj.nodes.back().x = target;
  };

  for (const DeltaSpike& d : inside) {
    run_to(d.position);
    const Cplx before = dpsi;
    dpsi += dir * d.strength * psi;  // psi'(x0+) - psi'(x0-) = W psi(x0)
    traj.jumps.push_back({d.position, psi, before, dpsi});
    if (opts.keep_nodes) traj.nodes.back().slope = dpsi;
  }
  run_to(x_end);

  traj.end = {psi, dpsi};
  return traj;
}

}  // namespace ptdelta
