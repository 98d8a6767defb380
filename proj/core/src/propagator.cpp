#include "ptdelta/propagator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>

#include "ptdelta/grid.hpp"
#include "ptdelta/observables.hpp"

namespace ptdelta {

namespace {

using Cplx = std::complex<double>;

std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

/// FFT workspace for one propagation; plans are thread-confined, creation
/// is serialized (FFTW planning is not thread-safe).
class Spectral {
 public:
  explicit Spectral(std::size_t n) : n_(n), buf_(n) {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    auto* raw = reinterpret_cast<fftw_complex*>(buf_.data());
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Spectral() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  /// psi <- F^-1 [ factors * F psi ], factors indexed like the k grid.
  void apply_kinetic(std::vector<Cplx>& psi, const std::vector<Cplx>& factors) {
    std::copy(psi.begin(), psi.end(), buf_.begin());
    fftw_execute(fwd_);
    for (std::size_t k = 0; k < n_; ++k) buf_[k] *= factors[k];
    fftw_execute(bwd_);
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t k = 0; k < n_; ++k) psi[k] = buf_[k] * inv;
  }

 private:
  std::size_t n_;
  std::vector<Cplx> buf_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

std::vector<double> k_grid(const Grid& grid) {
  const std::size_t n = grid.n_bins();
  const double dk = 2.0 * M_PI / grid.length();
  std::vector<double> k(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double m = j <= n / 2 ? static_cast<double>(j)
                                : static_cast<double>(j) - static_cast<double>(n);
    k[j] = dk * m;
  }
  return k;
}

std::vector<Cplx> kinetic_factors(const Grid& grid, double dt_half) {
  const auto k = k_grid(grid);
  std::vector<Cplx> f(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) {
    f[j] = std::polar(1.0, -k[j] * k[j] * dt_half);
  }
  return f;
}

/// exp(i theta) for |theta| <= 1e-3: the Taylor forms are exact to double
/// precision there and much cheaper than sincos in the hot loop.
inline Cplx unit_phasor(double theta) {
  if (std::abs(theta) < 1e-3) {
    const double t2 = theta * theta;
    const double c = 1.0 - 0.5 * t2 * (1.0 - t2 / 12.0);
    const double ssin = theta * (1.0 - t2 / 6.0 * (1.0 - t2 / 20.0));
    return {c, ssin};
  }
  return std::polar(1.0, theta);
}

struct BinSpike {
  std::size_t bin;
  Cplx strength_over_dx;
};

struct BinCoupling {
  std::size_t bin;
  double gamma_over_dx;
  std::size_t wave_a;
  std::size_t wave_b;
};

/// exp(-i dt [[p, c], [c, q]]) applied to (u, v); the block is Hermitian
/// with real p, q, c.
void exact_kick(double p, double q, double c, double dt, Cplx& u, Cplx& v) {
  const double mean = 0.5 * (p + q);
  const double d = 0.5 * (p - q);
  const double r = std::sqrt(d * d + c * c);
  const Cplx phase = std::polar(1.0, -mean * dt);
  double cr = std::cos(r * dt);
  double sr_over_r = r > 1e-300 ? std::sin(r * dt) / r : dt;
  const Cplx iu(0.0, 1.0);
  const Cplx u1 = phase * (cr * u - iu * sr_over_r * (d * u + c * v));
  const Cplx v1 = phase * (cr * v - iu * sr_over_r * (c * u - d * v));
  u = u1;
  v = v1;
}

class Stepper {
 public:
  Stepper(const Grid& grid, std::vector<WaveChannel> channels,
          const std::vector<CouplingPoint>& couplings, double g, CouplingMode mode,
          const AbsorbingMask& mask, double dt)
      : grid_(grid),
        g_(g),
        mode_(mode),
        dt_(dt),
        spectral_(grid.n_bins()),
        half_kinetic_(kinetic_factors(grid, 0.5 * dt)),
        full_kinetic_(kinetic_factors(grid, dt)) {
    const double dx = grid.dx();
    for (auto& ch : channels) {
      waves_.push_back(std::move(ch.psi));
      absorb_.push_back(ch.absorb);
      std::vector<BinSpike> bins;
      for (const DeltaSpike& s : ch.spikes) {
        bins.push_back({grid.nearest_bin(s.position), s.strength / dx});
      }
      spikes_.push_back(std::move(bins));
    }
    for (const CouplingPoint& c : couplings) {
      couplings_.push_back(
          {grid.nearest_bin(c.x0), c.gamma / dx, c.partners[0], c.partners[1]});
    }
    if (mask.enabled) {
      const double width = mask.width_fraction * grid.length();
      damp_.assign(grid.n_bins(), 1.0);
      bool any = false;
      for (std::size_t i = 0; i < grid.n_bins(); ++i) {
        const double d_edge = std::min(grid.x(i) - grid.x_min(),
                                       grid.x_max() - grid.x(i));
        if (d_edge < width) {
          const double s = std::cos(0.5 * M_PI * d_edge / width);
          damp_[i] = std::exp(-mask.strength * s * s * dt);
          any = true;
        }
      }
      if (!any) damp_.clear();
    }
  }

  std::size_t n_waves() const { return waves_.size(); }
  const std::vector<std::vector<Cplx>>& waves() const { return waves_; }
  std::vector<std::vector<Cplx>>& waves() { return waves_; }

  void step() {
    drift_half();
    potential_step();
    drift_half();
  }

  // merged-drift interface: consecutive half drifts combine into full ones,
  // so a run costs one kinetic application per step plus one extra half
  // drift at each synchronization point
  void drift_half() {
    for (auto& w : waves_) spectral_.apply_kinetic(w, half_kinetic_);
  }
  void drift_full() {
    for (auto& w : waves_) spectral_.apply_kinetic(w, full_kinetic_);
  }
  void potential_step() {
    const std::size_t n = grid_.n_bins();
    // bins handled by a coupling kick skip the scalar factors below
    std::vector<std::pair<std::size_t, std::size_t>> kick_bins;
    if (mode_ == CouplingMode::exact_kick) {
      for (const BinCoupling& c : couplings_) {
        kick_bins.emplace_back(c.wave_a, c.bin);
        kick_bins.emplace_back(c.wave_b, c.bin);
      }
    }
    auto kicked = [&](std::size_t w, std::size_t bin) {
      for (const auto& [kw, kb] : kick_bins) {
        if (kw == w && kb == bin) return true;
      }
      return false;
    };

    for (std::size_t w = 0; w < waves_.size(); ++w) {
      auto& psi = waves_[w];
      if (g_ != 0.0) {
        const double gdt = g_ * dt_;
        for (std::size_t i = 0; i < n; ++i) {
          psi[i] *= unit_phasor(gdt * std::norm(psi[i]));
        }
      }
      for (const BinSpike& s : spikes_[w]) {
        if (kicked(w, s.bin)) continue;  // folded into the 2x2 kick instead
        psi[s.bin] *= std::exp(Cplx(0.0, -1.0) * s.strength_over_dx * dt_);
      }
      if (!damp_.empty() && absorb_[w]) {
        for (std::size_t i = 0; i < n; ++i) psi[i] *= damp_[i];
      }
    }

    if (mode_ == CouplingMode::exact_kick) {
      for (const BinCoupling& c : couplings_) {
        auto& pa = waves_[c.wave_a][c.bin];
        auto& pb = waves_[c.wave_b][c.bin];
        // the scalar loop already applied the nonlinear phase at this bin;
        // remove it so the 2x2 block carries the full diagonal exactly
        if (g_ != 0.0) {
          pa *= unit_phasor(-g_ * std::norm(pa) * dt_);
          pb *= unit_phasor(-g_ * std::norm(pb) * dt_);
        }
        const double diag_a = real_spike_at(c.wave_a, c.bin) - g_ * std::norm(pa);
        const double diag_b = real_spike_at(c.wave_b, c.bin) - g_ * std::norm(pb);
        exact_kick(diag_a, diag_b, c.gamma_over_dx, dt_, pa, pb);
      }
    } else {
      for (const BinCoupling& c : couplings_) {
        auto& pa = waves_[c.wave_a][c.bin];
        auto& pb = waves_[c.wave_b][c.bin];
        const Cplx va = coupling_strength(pb, pa, c.gamma_over_dx);
        const Cplx vb = coupling_strength(pa, pb, c.gamma_over_dx);
        pa *= std::exp(Cplx(0.0, -1.0) * va * dt_);
        pb *= std::exp(Cplx(0.0, -1.0) * vb * dt_);
      }
    }
  }

  double real_spike_at(std::size_t w, std::size_t bin) const {
    for (const BinSpike& s : spikes_[w]) {
      if (s.bin == bin) return s.strength_over_dx.real();
    }
    return 0.0;
  }

  static Cplx coupling_strength(const Cplx& other, const Cplx& self, double gamma_dx) {
    const double mag = std::abs(self);
    if (mag < 1e-300) return 0.0;
    Cplx ratio = other / self;
    const double cap = 1e8;  // paper's large-Gamma failure mode, kept finite
    if (std::abs(ratio) > cap) ratio *= cap / std::abs(ratio);
    return gamma_dx * ratio;
  }

  Grid grid_;
  double g_;
  CouplingMode mode_;
  double dt_;
  Spectral spectral_;
  std::vector<Cplx> half_kinetic_;
  std::vector<Cplx> full_kinetic_;
  std::vector<std::vector<Cplx>> waves_;
  std::vector<bool> absorb_;
  std::vector<std::vector<BinSpike>> spikes_;
  std::vector<BinCoupling> couplings_;
  std::vector<double> damp_;
};

struct RunInputs {
  std::vector<WaveChannel> channels;
  std::vector<CouplingPoint> couplings;
  double g;
};

PropagationRecord run_once(const Grid& grid, const RunInputs& in,
                           const PropagationConfig& config, const SnapshotFn& on_snapshot,
                           double dt, std::size_t record_stride) {
  const auto t0 = std::chrono::steady_clock::now();
  Stepper stepper(grid, in.channels, in.couplings, in.g, config.coupling_mode,
                  config.mask, dt);
  const std::size_t n_waves = stepper.n_waves();
  const double dx = grid.dx();

  std::vector<std::vector<Cplx>> initial = stepper.waves();
  std::vector<double> initial_norm(n_waves);
  for (std::size_t w = 0; w < n_waves; ++w) {
    double s = 0.0;
    for (const Cplx& v : initial[w]) s += std::norm(v);
    initial_norm[w] = std::sqrt(s * dx);
  }
  std::size_t peak0 = 0;
  for (std::size_t i = 0; i < initial[0].size(); ++i) {
    if (std::norm(initial[0][i]) > std::norm(initial[0][peak0])) peak0 = i;
  }

  PropagationRecord rec;
  rec.norms_per_wave.resize(n_waves);
  rec.overlap_with_initial.resize(n_waves);

  const auto total_steps = static_cast<std::size_t>(std::llround(config.t_final / dt));
  double lifetime = config.t_final;
  bool lifetime_hit = false;

  auto record_frame = [&](double t, const std::vector<std::vector<Cplx>>& waves) {
    rec.times.push_back(t);
    for (std::size_t w = 0; w < n_waves; ++w) {
      double s = 0.0;
      Cplx ov = 0.0;
      for (std::size_t i = 0; i < waves[w].size(); ++i) {
        s += std::norm(waves[w][i]);
        ov += std::conj(initial[w][i]) * waves[w][i];
      }
      const double norm = std::sqrt(s * dx);
      const double overlap =
          norm > 1e-300 ? std::abs(ov) * dx / (initial_norm[w] * norm) : 0.0;
      rec.norms_per_wave[w].push_back(norm);
      rec.overlap_with_initial[w].push_back(overlap);
      if (!std::isfinite(norm)) {
        throw PropagationAbort("propagation aborted: non-finite norm at t = " +
                                   std::to_string(t),
                               std::move(rec), t);
      }
    }
    std::size_t peak = 0;
    for (std::size_t i = 0; i < waves[0].size(); ++i) {
      if (std::norm(waves[0][i]) > std::norm(waves[0][peak])) peak = i;
    }
    rec.peak_drift.push_back(std::abs(grid.x(peak) - grid.x(peak0)));
    if (!lifetime_hit && 1.0 - rec.overlap_with_initial[0].back() >
                             config.stationarity_threshold) {
      lifetime = t;
      lifetime_hit = true;
    }
  };

  record_frame(0.0, stepper.waves());
  if (on_snapshot) on_snapshot(0.0, stepper.waves());

  for (std::size_t s = 1; s <= total_steps; ++s) {
    stepper.step();
    const double t = static_cast<double>(s) * dt;
    if (s % record_stride == 0 || s == total_steps) {
      record_frame(t, stepper.waves());
    }
    if (on_snapshot && config.snapshot_stride > 0 &&
        (s % config.snapshot_stride == 0 || s == total_steps)) {
      on_snapshot(t, stepper.waves());
    }
  }

  rec.lifetime = lifetime;
  rec.final_waves = stepper.waves();
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace

void PropagationConfig::validate() const {
  if (!(dt > 0.0) || !(t_final > 0.0)) {
    throw DomainError("propagation: dt and t_final must be positive");
  }
  if (!allow_dt_override && (dt < 1e-6 || dt > 1e-4)) {
    throw DomainError("propagation: dt outside [1e-6, 1e-4]; set the override "
                      "flag to use a nonstandard step");
  }
  if (record_stride == 0) {
    throw DomainError("propagation: record_stride must be positive");
  }
  if (!(stationarity_threshold > 0.0)) {
    throw DomainError("propagation: stationarity threshold must be positive");
  }
}

double reduced_to_si_time(double t_reduced, double scale_ms_per_unit) {
  if (!(scale_ms_per_unit > 0.0)) {
    throw DomainError("reduced_to_si_time: scale must be positive");
  }
  return t_reduced * scale_ms_per_unit;
}

const char* stability_name(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::potentially_stable: return "potentially-stable";
    case Stability::unstable: return "unstable";
  }
  return "?";
}

const char* coupling_mode_name(CouplingMode m) {
  return m == CouplingMode::exact_kick ? "exact-kick" : "effective-potential";
}

std::vector<std::vector<Complex>> split_step(const Grid& grid,
                                             std::vector<std::vector<Complex>> waves,
                                             const std::vector<std::vector<DeltaSpike>>& potentials,
                                             const std::vector<CouplingPoint>& couplings,
                                             double g, double dt, CouplingMode mode) {
  if (waves.empty() || potentials.size() != waves.size()) {
    throw DomainError("split_step: one potential list per wave required");
  }
  if (!(dt > 0.0)) {
    throw DomainError("split_step: dt must be positive");
  }
  std::vector<WaveChannel> channels;
  for (std::size_t w = 0; w < waves.size(); ++w) {
    if (waves[w].size() != grid.n_bins()) {
      throw DomainError("split_step: wave size does not match the grid");
    }
    channels.push_back({std::move(waves[w]), potentials[w], false});
  }
  AbsorbingMask no_mask;
  no_mask.enabled = false;
  Stepper stepper(grid, std::move(channels), couplings, g, mode, no_mask, dt);
  stepper.step();
  return std::move(stepper.waves());
}


namespace {

void classify_record(PropagationRecord& rec, const Grid& grid, const RunInputs& in,
                     const PropagationConfig& config) {
  if (rec.lifetime >= config.t_final) {
    rec.classification = Stability::stable;
    return;
  }
  if (!config.classify) {
    rec.classification = Stability::unstable;
    return;
  }
  PropagationConfig refined = config;
  refined.classify = false;
  refined.allow_dt_override = true;
  const PropagationRecord r2 =
      run_once(grid, in, refined, {}, config.dt / 10.0, config.record_stride * 10);
  rec.lifetime_refined = r2.lifetime;
  rec.classification = r2.lifetime > 1.1 * rec.lifetime ? Stability::potentially_stable
                                                        : Stability::unstable;
}

}  // namespace

PropagationRecord propagate(const CoupledSystem& system,
                            const PropagationConfig& config, const SnapshotFn& on_snapshot) {
  config.validate();
  if (system.waves.empty()) {
    throw DomainError("propagate: system has no waves");
  }
  const Grid grid = system.waves.front().grid();
  RunInputs in;
  in.g = system.g;
  for (std::size_t w = 0; w < system.waves.size(); ++w) {
    WaveChannel ch;
    ch.psi = system.waves[w].values();
    ch.spikes = system.wells[w];
    ch.absorb = system.unbound[w];
    in.channels.push_back(std::move(ch));
  }
  in.couplings = system.couplings;

  PropagationRecord rec = run_once(grid, in, config, on_snapshot, config.dt,
                                   config.record_stride);
  classify_record(rec, grid, in, config);
  return rec;
}

PropagationRecord propagate(const ComplexField& initial,
                            std::span<const DeltaSpike> potential, double g,
                            const PropagationConfig& config, const SnapshotFn& on_snapshot,
                            bool absorb) {
  config.validate();
  RunInputs in;
  in.g = g;
  WaveChannel ch;
  ch.psi = initial.values();
  ch.spikes.assign(potential.begin(), potential.end());
  ch.absorb = absorb;
  in.channels.push_back(std::move(ch));

  PropagationRecord rec = run_once(initial.grid(), in, config, on_snapshot, config.dt,
                                   config.record_stride);
  classify_record(rec, initial.grid(), in, config);
  return rec;
}

}  // namespace ptdelta
