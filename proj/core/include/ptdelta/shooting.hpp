#pragma once

#include <complex>
#include <span>
#include <vector>

#include "ptdelta/well_system.hpp"

namespace ptdelta {

/// Value and first derivative of the wave function at one point.
struct ShootingState {
  std::complex<double> value;
  std::complex<double> slope;
};

struct TrajectoryNode {
  double x;
  std::complex<double> value;
  std::complex<double> slope;  ///< right-sided derivative at delta positions
};

/// Bookkeeping of one delta crossing: psi is continuous, the derivative
/// jumps by strength * psi(x0) in the direction of increasing x.
struct JumpRecord {
  double x;
  std::complex<double> value;
  std::complex<double> slope_before;
  std::complex<double> slope_after;
};

struct Trajectory {
  std::vector<TrajectoryNode> nodes;  ///< at every RK4 node, in integration order
  std::vector<JumpRecord> jumps;
  ShootingState end;

  /// Value at the node nearest to x (nodes are dense, spacing <= max_step).
  std::complex<double> value_near(double x) const;
};

struct IntegrationOptions {
  double max_step = 5e-3;
  double overflow_limit = 1e12;
  bool keep_nodes = true;  ///< false: record only jumps and the end state
};

/// Fixed-step RK4 integration of the stationary equation
///   psi'' = -(mu + g |psi|^2) psi
/// between delta spikes, with the derivative jump psi'(x0+) = psi'(x0-) +
/// strength * psi(x0) applied at every spike. Integrates from x_start to
/// x_end in either direction; spikes outside the span are ignored. Node
/// placement puts every spike position exactly on a node. Throws
/// OverflowError when |psi| exceeds the overflow limit.
Trajectory integrate_with_jumps(std::complex<double> mu, double g, double x_start,
                                ShootingState y0, std::span<const DeltaSpike> deltas,
                                double x_end, const IntegrationOptions& opts = {});

}  // namespace ptdelta
