#include "ptdelta/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "ptdelta/field_io.hpp"

namespace ptdelta::cli {

namespace {

struct Entry {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

std::string fmt_bool(bool b) { return b ? "on" : "off"; }

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("config: boolean key '" + key + "' got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: numeric key '" + key + "' got '" + v + "'");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("config: integer key '" + key + "' got '" + v + "'");
  }
}

#define DOUBLE_ENTRY(key, field)                                             \
  {key,                                                                      \
   {[](const ExperimentConfig& c) { return format_double(c.field); },        \
    [](ExperimentConfig& c, const std::string& v) {                          \
      c.field = parse_double(key, v);                                        \
    }}}
#define UINT_ENTRY(key, field)                                               \
  {key,                                                                      \
   {[](const ExperimentConfig& c) { return std::to_string(c.field); },       \
    [](ExperimentConfig& c, const std::string& v) {                          \
      c.field = parse_uint(key, v);                                          \
    }}}
#define BOOL_ENTRY(key, field)                                               \
  {key,                                                                      \
   {[](const ExperimentConfig& c) { return fmt_bool(c.field); },             \
    [](ExperimentConfig& c, const std::string& v) {                          \
      c.field = parse_bool(key, v);                                          \
    }}}
#define STRING_ENTRY(key, field)                                             \
  {key,                                                                      \
   {[](const ExperimentConfig& c) { return c.field; },                       \
    [](ExperimentConfig& c, const std::string& v) { c.field = v; }}}

const std::map<std::string, Entry>& schema() {
  static const std::map<std::string, Entry> s = {
      DOUBLE_ENTRY("well.a", well_a),
      DOUBLE_ENTRY("well.v", well_v),
      DOUBLE_ENTRY("well.gamma", well_gamma),
      DOUBLE_ENTRY("well.g", well_g),
      DOUBLE_ENTRY("grid.x_min", grid_x_min),
      DOUBLE_ENTRY("grid.x_max", grid_x_max),
      UINT_ENTRY("grid.bins", grid_bins),
      DOUBLE_ENTRY("solver.tolerance", solver_tolerance),
      UINT_ENTRY("solver.max_iterations", solver_max_iterations),
      DOUBLE_ENTRY("solver.pin_amplitude", solver_pin_amplitude),
      DOUBLE_ENTRY("solver.fd_step", solver_fd_step),
      DOUBLE_ENTRY("solver.tail_margin_factor", solver_tail_margin_factor),
      STRING_ENTRY("run.branch", run_branch),
      DOUBLE_ENTRY("run.mu_guess_re", run_mu_guess_re),
      DOUBLE_ENTRY("run.mu_guess_im", run_mu_guess_im),
      UINT_ENTRY("run.seed", run_seed),
      UINT_ENTRY("run.workers", run_workers),
      BOOL_ENTRY("run.snap_delta", run_snap_delta),
      STRING_ENTRY("feeder.mode", feeder_mode),
      DOUBLE_ENTRY("feeder.amplitude", feeder_amplitude),
      DOUBLE_ENTRY("feeder.amplitude3", feeder_amplitude3),
      DOUBLE_ENTRY("feeder.psi2_at_0", feeder_psi2_at_0),
      DOUBLE_ENTRY("propagation.dt", prop_dt),
      DOUBLE_ENTRY("propagation.t_final", prop_t_final),
      UINT_ENTRY("propagation.record_stride", prop_record_stride),
      UINT_ENTRY("propagation.snapshot_stride", prop_snapshot_stride),
      STRING_ENTRY("propagation.coupling_mode", prop_coupling_mode),
      BOOL_ENTRY("propagation.absorb", prop_absorb),
      DOUBLE_ENTRY("propagation.mask_width_fraction", prop_mask_width_fraction),
      DOUBLE_ENTRY("propagation.mask_strength", prop_mask_strength),
      DOUBLE_ENTRY("propagation.threshold", prop_threshold),
      BOOL_ENTRY("propagation.classify", prop_classify),
      BOOL_ENTRY("propagation.dt_override", prop_dt_override),
      DOUBLE_ENTRY("propagation.perturb", prop_perturb),
      STRING_ENTRY("output.dir", output_dir),
  };
  return s;
}

#undef DOUBLE_ENTRY
#undef UINT_ENTRY
#undef BOOL_ENTRY
#undef STRING_ENTRY

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ExperimentConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) {
      throw ConfigError(std::string("config: ") + name + " must be positive");
    }
  };
  positive(solver_tolerance, "solver.tolerance");
  positive(solver_fd_step, "solver.fd_step");
  positive(solver_pin_amplitude, "solver.pin_amplitude");
  positive(solver_tail_margin_factor, "solver.tail_margin_factor");
  positive(prop_dt, "propagation.dt");
  positive(prop_t_final, "propagation.t_final");
  positive(prop_threshold, "propagation.threshold");
  positive(well_a, "well.a");
  if (grid_x_max <= grid_x_min) {
    throw ConfigError("config: grid.x_max must exceed grid.x_min");
  }
  if (run_branch != "ground" && run_branch != "excited") {
    throw ConfigError("config: run.branch must be ground or excited");
  }
  if (feeder_mode != "two" && feeder_mode != "single" && feeder_mode != "bound-check" &&
      feeder_mode != "direct") {
    throw ConfigError("config: feeder.mode must be two|single|bound-check|direct");
  }
  if (prop_coupling_mode != "exact-kick" && prop_coupling_mode != "effective-potential") {
    throw ConfigError("config: propagation.coupling_mode must be exact-kick or "
                      "effective-potential");
  }
}

Grid ExperimentConfig::make_grid() const {
  try {
    return Grid(grid_x_min, grid_x_max, grid_bins);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

WellSystem ExperimentConfig::make_well() const {
  return {well_a, well_v, well_gamma, well_g};
}

SolverOptions ExperimentConfig::make_solver_options() const {
  SolverOptions o;
  o.tolerance = solver_tolerance;
  o.max_iterations = static_cast<int>(solver_max_iterations);
  o.pin_amplitude = solver_pin_amplitude;
  o.fd_step = solver_fd_step;
  o.tail_margin_factor = solver_tail_margin_factor;
  return o;
}

PropagationConfig ExperimentConfig::make_propagation_config() const {
  PropagationConfig p;
  p.dt = prop_dt;
  p.t_final = prop_t_final;
  p.record_stride = prop_record_stride;
  p.snapshot_stride = prop_snapshot_stride;
  p.coupling_mode = prop_coupling_mode == "exact-kick" ? CouplingMode::exact_kick
                                                       : CouplingMode::effective_potential;
  p.mask.enabled = prop_absorb;
  p.mask.width_fraction = prop_mask_width_fraction;
  p.mask.strength = prop_mask_strength;
  p.stationarity_threshold = prop_threshold;
  p.classify = prop_classify;
  p.allow_dt_override = prop_dt_override;
  return p;
}

Branch ExperimentConfig::branch() const {
  return run_branch == "excited" ? Branch::excited : Branch::ground;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
    }
    apply_override(cfg, t);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  for (const auto& [key, entry] : schema()) {
    out << key << " = " << entry.get(cfg) << "\n";
  }
  return out.str();
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("config: override '" + assignment + "' has no '='");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto it = schema().find(key);
  if (it == schema().end()) {
    throw ConfigError("config: unknown key '" + key + "'");
  }
  it->second.set(cfg, value);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ptdelta::cli
