#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ptdelta/grid.hpp"
#include "ptdelta/propagator.hpp"
#include "ptdelta/stationary.hpp"
#include "ptdelta/well_system.hpp"

namespace ptdelta::cli {

/// Configuration error (bad file, bad key, bad value). Maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full experiment description. Serializes to sorted `key = value` lines;
/// parsing the serialized form reproduces the struct exactly.
struct ExperimentConfig {
  // well
  double well_a = 1.1;
  double well_v = -1.0;
  double well_gamma = 0.1;
  double well_g = 1.0;
  // grid
  double grid_x_min = -40.0;
  double grid_x_max = 40.0;
  std::uint64_t grid_bins = 16384;
  // solver
  double solver_tolerance = 1e-9;
  std::uint64_t solver_max_iterations = 100;
  double solver_pin_amplitude = 0.5;
  double solver_fd_step = 1e-7;
  double solver_tail_margin_factor = 4.0;
  // run
  std::string run_branch = "ground";
  double run_mu_guess_re = 0.0;  ///< 0 = seed from the linear Hermitian limit
  double run_mu_guess_im = 0.0;
  std::uint64_t run_seed = 12345;
  std::uint64_t run_workers = 0;  ///< 0 = hardware concurrency
  bool run_snap_delta = true;     ///< snap well positions to grid bins for evolve
  // feeder
  std::string feeder_mode = "two";  ///< two | single | bound-check | direct
  double feeder_amplitude = 0.7;    ///< psi2(+a) for the two-feeder setup
  double feeder_amplitude3 = 0.7;   ///< psi3(-a)
  double feeder_psi2_at_0 = 0.5;
  // propagation
  double prop_dt = 1e-4;
  double prop_t_final = 10.0;
  std::uint64_t prop_record_stride = 100;
  std::uint64_t prop_snapshot_stride = 0;
  std::string prop_coupling_mode = "exact-kick";
  bool prop_absorb = true;
  double prop_mask_width_fraction = 0.10;
  double prop_mask_strength = 5.0;
  double prop_threshold = 0.10;
  bool prop_classify = true;
  bool prop_dt_override = false;
  double prop_perturb = 0.0;
  // output
  std::string output_dir = "ptdelta-out";

  void validate() const;

  Grid make_grid() const;
  WellSystem make_well() const;
  SolverOptions make_solver_options() const;
  PropagationConfig make_propagation_config() const;
  Branch branch() const;
};

/// Key/value round trip. Unknown keys are a ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// Apply one `section.key=value` override (CLI flag form).
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// FNV-1a over the canonical serialization; stable across runs.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace ptdelta::cli
