#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ptdelta/coupling.hpp"
#include "ptdelta/errors.hpp"

namespace ptdelta {

/// Reduced time unit in milliseconds for the reference setup (5000 Rb-87
/// atoms, well distance 2.2 um): 45 reduced units correspond to 123 ms.
inline constexpr double kMsPerReducedUnit = 123.0 / 45.0;

double reduced_to_si_time(double t_reduced, double scale_ms_per_unit = kMsPerReducedUnit);

enum class CouplingMode { exact_kick, effective_potential };
enum class Stability { stable, potentially_stable, unstable };

const char* stability_name(Stability s);
const char* coupling_mode_name(CouplingMode m);

/// cos^2-shaped absorbing layer at both grid edges, applied to waves with
/// non-decaying tails. Off means periodic wraparound.
struct AbsorbingMask {
  bool enabled = true;
  double width_fraction = 0.10;
  double strength = 5.0;
};

struct PropagationConfig {
  double dt = 1e-4;
  double t_final = 10.0;
  std::size_t record_stride = 100;
  CouplingMode coupling_mode = CouplingMode::exact_kick;
  AbsorbingMask mask{};
  double stationarity_threshold = 0.10;
  bool classify = true;  ///< rerun at dt/10 when the lifetime is finite
  bool allow_dt_override = false;
  std::size_t snapshot_stride = 0;  ///< 0 disables snapshots

  /// dt must stay within [1e-6, 1e-4] unless allow_dt_override is set.
  void validate() const;
};

struct PropagationRecord {
  std::vector<double> times;
  std::vector<std::vector<double>> norms_per_wave;       ///< [wave][frame]
  std::vector<std::vector<double>> overlap_with_initial; ///< [wave][frame]
  std::vector<double> peak_drift;                        ///< wave 0, position units
  double lifetime = 0.0;          ///< first time wave 0 overlap deviates > threshold
  Stability classification = Stability::stable;
  double lifetime_refined = -1.0; ///< dt/10 rerun result, -1 when not run
  double wall_time_s = 0.0;
  std::vector<std::vector<Complex>> final_waves;
};

/// Propagation failure (NaN or overflow); carries what was recorded so far.
struct PropagationAbort : std::runtime_error {
  PropagationRecord partial;
  double t_abort;
  PropagationAbort(std::string msg, PropagationRecord rec, double t)
      : std::runtime_error(std::move(msg)), partial(std::move(rec)), t_abort(t) {}
};

/// One wave in the propagation: its samples, its own delta potentials
/// (complex strengths allowed for direct non-Hermitian evolution), and
/// whether the absorbing mask erodes it.
struct WaveChannel {
  std::vector<Complex> psi;
  std::vector<DeltaSpike> spikes;
  bool absorb = false;
};

using SnapshotFn = std::function<void(double t, const std::vector<std::vector<Complex>>&)>;

/// One Strang step for a set of waves: half kinetic (momentum space), full
/// potential step (position space: nearest-bin deltas of strength/dx, the
/// nonlinearity -g|psi|^2 frozen at step start, coupling kicks), half
/// kinetic. In exact_kick mode each coupling bin advances the two coupled
/// amplitudes by the exact 2x2 Hermitian matrix exponential (norm-preserving
/// at the discrete level); in effective_potential mode each wave sees the
/// instantaneous scalar strength gamma psi_other/psi_self, which is not
/// exactly norm-preserving under discretization.
std::vector<std::vector<Complex>> split_step(const Grid& grid,
                                             std::vector<std::vector<Complex>> waves,
                                             const std::vector<std::vector<DeltaSpike>>& potentials,
                                             const std::vector<CouplingPoint>& couplings,
                                             double g, double dt,
                                             CouplingMode mode = CouplingMode::exact_kick);

/// Time evolution of a coupled system; records norms, overlaps and the
/// stationarity lifetime, and classifies stability by a dt/10 rerun when
/// requested. Delta positions are snapped to the nearest bin. The lifetime
/// criterion watches wave 0 (the double-well system wave): feeder overlaps
/// drift under edge absorption without the compound state losing its
/// stationary character.
PropagationRecord propagate(const CoupledSystem& system,
                            const PropagationConfig& config,
                            const SnapshotFn& on_snapshot = {});

/// Single wave in an explicit (possibly non-Hermitian) delta potential.
PropagationRecord propagate(const ComplexField& initial,
                            std::span<const DeltaSpike> potential, double g,
                            const PropagationConfig& config,
                            const SnapshotFn& on_snapshot = {}, bool absorb = false);

}  // namespace ptdelta
