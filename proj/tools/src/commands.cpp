#include "ptdelta/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>

#include "ptdelta/branches.hpp"
#include "ptdelta/cli/config.hpp"
#include "ptdelta/cli/manifest.hpp"
#include "ptdelta/errors.hpp"
#include "ptdelta/feeder.hpp"
#include "ptdelta/field_io.hpp"
#include "ptdelta/observables.hpp"
#include "ptdelta/propagator.hpp"

namespace ptdelta::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& c) {
  cmd->add_option("--config", c.config_file, "key = value configuration file");
  cmd->add_option("--set", c.overrides, "override one config key, e.g. --set well.g=0.5");
  cmd->add_option("--out", c.out_dir, "output directory (or PTDELTA_OUT_DIR)");
}

ExperimentConfig build_config(const CommonArgs& c) {
  ExperimentConfig cfg;
  if (!c.config_file.empty()) {
    cfg = load_config_file(c.config_file);
  }
  for (const std::string& ov : c.overrides) {
    apply_override(cfg, ov);
  }
  cfg.validate();
  return cfg;
}

fs::path resolve_out_dir(const CommonArgs& c, const ExperimentConfig& cfg) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv("PTDELTA_OUT_DIR")) {
    if (*env != '\0') return env;
  }
  return cfg.output_dir;
}

struct RangeSpec {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
};

RangeSpec parse_range(const std::string& text) {
  RangeSpec r;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':' ||
      !(r.step > 0.0)) {
    throw ConfigError("expected lo:hi:step, got '" + text + "'");
  }
  return r;
}

std::vector<double> range_values(const RangeSpec& r) {
  std::vector<double> v;
  for (double x = r.lo; x <= r.hi + 1e-12 * std::max(1.0, std::abs(r.hi)); x += r.step) {
    v.push_back(x);
  }
  return v;
}

StationaryState solve_base_state(const ExperimentConfig& cfg, const WellSystem& well,
                                 const Grid& grid, bool validate) {
  SolverOptions opts = cfg.make_solver_options();
  opts.validate = validate;
  if (cfg.run_mu_guess_re != 0.0 || cfg.run_mu_guess_im != 0.0) {
    const BranchHint hint =
        cfg.branch() == Branch::ground ? BranchHint::ground : BranchHint::excited;
    return find_state(well, grid, {cfg.run_mu_guess_re, cfg.run_mu_guess_im}, hint, opts);
  }
  return solve_by_continuation(well, grid, cfg.branch(), opts);
}

json state_json(const StationaryState& st) {
  json j;
  j["mu"] = {{"re", st.mu.real()}, {"im", st.mu.imag()}};
  j["branch"] = branch_name(st.branch);
  j["residual"] = st.residual;
  j["kappa"] = st.kappa();
  j["norm_squared"] = norm_squared(st.field);
  j["max_abs"] = st.field.max_abs();
  j["psi_at_wells"] = {{"left_re", st.value_left_well.real()},
                       {"left_im", st.value_left_well.imag()},
                       {"right_re", st.value_right_well.real()},
                       {"right_im", st.value_right_well.imag()}};
  j["phase_drop"] = interior_phase_drop(st);
  j["phase_defect"] = bound_feeder_phase_defect(st);
  return j;
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  if (!out) {
    throw ConfigError("cannot write " + p.string());
  }
  out << content;
}

// ---- subcommand bodies ------------------------------------------------

int cmd_state(const CommonArgs& common, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = build_config(common);
  const fs::path dir = resolve_out_dir(common, cfg);
  fs::create_directories(dir);

  const Grid grid = cfg.make_grid();
  const WellSystem well = cfg.make_well();
  const StationaryState st = solve_base_state(cfg, well, grid, true);

  std::ostringstream csv;
  write_field_csv(csv, st.field);
  write_text(dir / "state.csv", csv.str());
  write_text(dir / "state.json", state_json(st).dump(2) + "\n");

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "state", common.overrides, cfg, wall, {"state.csv", "state.json"});
  out << state_json(st).dump(2) << "\n";
  return kOk;
}

int cmd_spectrum(const CommonArgs& common, const std::string& gamma_range,
                 std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = build_config(common);
  const fs::path dir = resolve_out_dir(common, cfg);
  fs::create_directories(dir);

  const Grid grid = cfg.make_grid();
  const std::vector<double> gammas = range_values(parse_range(gamma_range));
  if (gammas.empty()) {
    throw ConfigError("spectrum: empty gamma range");
  }
  SolverOptions opts = cfg.make_solver_options();
  opts.validate = false;

  WellSystem base = cfg.make_well();
  base.non_hermiticity = gammas.front();

  struct Row {
    double gamma;
    int order;
    const char* branch;
    Complex mu;
    double residual;
  };
  std::vector<Row> rows;

  auto trace_into = [&](const StationaryState& seed, std::span<const double> targets,
                        int order, const char* label) -> SpectrumBranch {
    SpectrumBranch br = trace_branch(seed, targets, grid, opts);
    for (const BranchPoint& p : br.points) {
      rows.push_back({p.gamma, order, label, p.mu, p.residual});
    }
    return br;
  };

  const StationaryState ground = solve_by_continuation(base, grid, Branch::ground, opts);
  const SpectrumBranch ground_br = trace_into(ground, gammas, 0, "ground");
  const StationaryState excited = solve_by_continuation(base, grid, Branch::excited, opts);
  trace_into(excited, gammas, 1, "excited");

  // PT-broken pair: seed just above the ground-branch end, then walk the
  // requested gammas upward and downward from there
  if (!ground_br.points.empty()) {
    const BranchPoint& endp = ground_br.points.back();
    WellSystem end_sys = base;
    end_sys.non_hermiticity = endp.gamma;
    const StationaryState end_state =
        find_state_seeded(ground_br.seed_at(ground_br.points.size() - 1), end_sys, grid,
                          opts);
    for (int sign : {+1, -1}) {
      std::optional<StationaryState> bseed;
      for (double delta : {2e-3, 5e-3, 1e-2, 2e-2}) {
        bseed = seed_broken_state(end_state, endp.gamma + delta, grid, opts, sign);
        if (bseed) break;
      }
      if (!bseed) continue;
      const char* label = sign > 0 ? "broken_plus" : "broken_minus";
      const double g0 = bseed->system.non_hermiticity;
      std::vector<double> up, down;
      for (double gv : gammas) {
        (gv >= g0 ? up : down).push_back(gv);
      }
      std::sort(down.begin(), down.end(), std::greater<>());
      trace_into(*bseed, up, sign > 0 ? 2 : 3, label);
      trace_into(*bseed, down, sign > 0 ? 2 : 3, label);
    }
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.gamma != b.gamma ? a.gamma < b.gamma : a.order < b.order;
  });
  std::ostringstream csv;
  csv << "gamma,branch,re_mu,im_mu,residual\n";
  for (const Row& r : rows) {
    csv << format_double(r.gamma) << ',' << r.branch << ',' << format_double(r.mu.real())
        << ',' << format_double(r.mu.imag()) << ',' << format_double(r.residual) << "\n";
  }
  write_text(dir / "spectrum.csv", csv.str());

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "spectrum", common.overrides, cfg, wall, {"spectrum.csv"});
  out << "{\"rows\": " << rows.size() << ", \"out\": \"" << (dir / "spectrum.csv").string()
      << "\"}\n";
  return kOk;
}

int cmd_critical(const CommonArgs& common, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = build_config(common);
  const fs::path dir = resolve_out_dir(common, cfg);
  fs::create_directories(dir);

  const Grid grid = cfg.make_grid();
  SolverOptions opts = cfg.make_solver_options();
  opts.validate = false;
  WellSystem base = cfg.make_well();
  base.non_hermiticity = 0.0;
  const StationaryState seed = solve_by_continuation(base, grid, Branch::ground, opts);
  CriticalSearchOptions copts;
  copts.solver = opts;
  const CriticalPoints crit = locate_critical(seed, grid, copts);

  json j;
  j["gamma_c"] = crit.gamma_c;
  j["gamma_c_star"] = crit.gamma_c_star;
  j["bracket_width"] = crit.bracket_width;
  j["parameters"] = {{"a", cfg.well_a},
                     {"v", cfg.well_v},
                     {"g", cfg.well_g},
                     {"pin_amplitude", cfg.solver_pin_amplitude}};
  write_text(dir / "critical.json", j.dump(2) + "\n");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "critical", common.overrides, cfg, wall, {"critical.json"});
  out << j.dump(2) << "\n";
  return kOk;
}

json feeder_json(const CoupledSystem& sys, const std::string& mode) {
  json j;
  j["mode"] = mode;
  j["mu"] = {{"re", sys.mu.real()}, {"im", sys.mu.imag()}};
  j["gamma"] = sys.couplings.empty() ? 0.0 : sys.couplings.front().gamma;
  j["gamma_tilde"] = sys.couplings.size() > 1 ? sys.couplings.back().gamma : 0.0;
  j["residuals"] = {{"coupling", sys.coupling_residual_max},
                    {"phase", sys.phase_residual_max},
                    {"flux", sys.flux_imbalance}};
  j["phase_defect"] = sys.phase_defect;
  json norms = json::array();
  for (const auto& w : sys.waves) norms.push_back(norm_squared(w));
  j["norms"] = norms;
  return j;
}

CoupledSystem build_system_from_config(const ExperimentConfig& cfg,
                                       const StationaryState& st, const Grid& grid) {
  if (cfg.feeder_mode == "two") {
    return build_two_feeder_system(st, {cfg.feeder_amplitude, cfg.feeder_amplitude3},
                                   grid);
  }
  if (cfg.feeder_mode == "single") {
    return build_single_unbound_feeder(st, cfg.feeder_psi2_at_0, grid);
  }
  if (cfg.feeder_mode == "bound-check") {
    return build_bound_feeder(st, grid);
  }
  throw ConfigError("feeder mode '" + cfg.feeder_mode + "' does not build a system");
}

int cmd_feeders(const CommonArgs& common, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = build_config(common);
  const fs::path dir = resolve_out_dir(common, cfg);
  fs::create_directories(dir);

  const Grid grid = cfg.make_grid();
  const WellSystem well = cfg.make_well();
  const StationaryState st = solve_base_state(cfg, well, grid, true);

  json j;
  std::vector<std::string> outputs;
  if (cfg.feeder_mode == "bound-check") {
    const double defect = bound_feeder_phase_defect(st);
    j["mode"] = "bound-check";
    j["phase_defect"] = defect;
    j["mu"] = {{"re", st.mu.real()}, {"im", st.mu.imag()}};
    j["bound_feeder_admissible"] = std::abs(defect) < 1e-6;
    if (std::abs(defect) < 1e-6) {
      const CoupledSystem sys = build_bound_feeder(st, grid);
      std::ostringstream csv;
      write_fields_csv(csv, sys.waves, {"psi1", "psi2"});
      write_text(dir / "system.csv", csv.str());
      outputs.push_back("system.csv");
      j["system"] = feeder_json(sys, "bound");
    }
  } else {
    const CoupledSystem sys = build_system_from_config(cfg, st, grid);
    std::vector<std::string> names;
    for (std::size_t w = 0; w < sys.waves.size(); ++w) {
      names.push_back("psi" + std::to_string(w + 1));
    }
    std::ostringstream csv;
    write_fields_csv(csv, sys.waves, names);
    write_text(dir / "system.csv", csv.str());
    outputs.push_back("system.csv");
    j = feeder_json(sys, cfg.feeder_mode);
  }
  write_text(dir / "feeders.json", j.dump(2) + "\n");
  outputs.push_back("feeders.json");

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "feeders", common.overrides, cfg, wall, outputs);
  out << j.dump(2) << "\n";
  return kOk;
}

int cmd_phase_locus(const CommonArgs& common, const std::string& g_range,
                    std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = build_config(common);
  const fs::path dir = resolve_out_dir(common, cfg);
  fs::create_directories(dir);

  const Grid grid = cfg.make_grid();
  SolverOptions opts = cfg.make_solver_options();
  opts.validate = false;

  RangeSpec r = parse_range(g_range);
  const std::vector<double> gs = range_values(r);
  if (gs.empty()) {
    throw ConfigError("phase-locus: empty g range");
  }

  // independent g points run on a bounded worker pool; results are
  // collected by index and written by this thread only
  const std::size_t workers =
      cfg.run_workers > 0 ? cfg.run_workers
                          : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<std::vector<LocusPoint>>> futures(gs.size());
  std::vector<std::vector<LocusPoint>> results(gs.size());
  std::size_t next = 0;
  while (next < gs.size()) {
    const std::size_t batch = std::min(workers, gs.size() - next);
    for (std::size_t k = 0; k < batch; ++k) {
      const double g = gs[next + k];
      futures[next + k] = std::async(std::launch::async, [g, &cfg, &grid, &opts]() {
        const double one[] = {g};
        return trace_psi_c_locus(cfg.well_a, cfg.well_v, one, grid, opts);
      });
    }
    for (std::size_t k = 0; k < batch; ++k) {
      results[next + k] = futures[next + k].get();
    }
    next += batch;
  }

  std::ostringstream csv;
  csv << "g,gamma,defect,gamma_c,gamma_c_star,dynamically_stable\n";
  json points = json::array();
  for (const auto& res : results) {
    for (const LocusPoint& p : res) {
      csv << format_double(p.g) << ',' << format_double(p.gamma) << ','
          << format_double(p.defect) << ',' << format_double(p.gamma_c) << ','
          << format_double(p.gamma_c_star) << ',' << (p.dynamically_stable ? 1 : 0)
          << "\n";
      points.push_back({{"g", p.g},
                        {"gamma", p.gamma},
                        {"defect", p.defect},
                        {"gamma_c", p.gamma_c},
                        {"gamma_c_star", p.gamma_c_star},
                        {"dynamically_stable", p.dynamically_stable}});
    }
  }
  write_text(dir / "locus.csv", csv.str());
  json j;
  j["points"] = points;
  write_text(dir / "locus.json", j.dump(2) + "\n");

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "phase-locus", common.overrides, cfg, wall,
                 {"locus.csv", "locus.json"});
  out << j.dump(2) << "\n";
  return kOk;
}

void perturb_waves(std::vector<ComplexField>& waves, double eps, std::uint64_t seed) {
  if (eps <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& f : waves) {
    const double scale = eps * f.max_abs();
    std::vector<Complex> vals = f.values();
    for (Complex& v : vals) {
      v += scale * Complex(u(rng), u(rng));
    }
    f = ComplexField(f.grid(), std::move(vals));
  }
}

int cmd_evolve(const CommonArgs& common, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = build_config(common);
  const fs::path dir = resolve_out_dir(common, cfg);
  fs::create_directories(dir);

  const Grid grid = cfg.make_grid();
  WellSystem well = cfg.make_well();
  if (cfg.run_snap_delta) {
    well = well.snapped_to(grid);
  }
  const StationaryState st = solve_base_state(cfg, well, grid, true);
  const PropagationConfig pconf = cfg.make_propagation_config();

  // streaming snapshot writer (downsampled field frames)
  std::size_t frame_count = 0;
  std::ofstream index;
  const std::size_t decimate = 8;
  SnapshotFn on_snapshot;
  if (pconf.snapshot_stride > 0) {
    fs::create_directories(dir / "snapshots");
    index.open(dir / "snapshots" / "index.csv");
    index << "frame,t,file\n";
    on_snapshot = [&](double t, const std::vector<std::vector<Complex>>& waves) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%06zu.csv", frame_count);
      std::ofstream f(dir / "snapshots" / name);
      f << "x";
      for (std::size_t w = 0; w < waves.size(); ++w) {
        f << ",re_psi" << w + 1 << ",im_psi" << w + 1;
      }
      f << "\n";
      for (std::size_t i = 0; i < grid.n_bins(); i += decimate) {
        f << format_double(grid.x(i));
        for (const auto& w : waves) {
          f << ',' << format_double(w[i].real()) << ',' << format_double(w[i].imag());
        }
        f << "\n";
      }
      index << frame_count << ',' << format_double(t) << ',' << name << "\n";
      ++frame_count;
    };
  }

  PropagationRecord rec;
  bool aborted = false;
  std::string abort_msg;
  std::size_t n_waves = 1;
  try {
    if (cfg.feeder_mode == "direct") {
      ComplexField initial = st.field;
      {
        std::vector<ComplexField> tmp{std::move(initial)};
        perturb_waves(tmp, cfg.prop_perturb, cfg.run_seed);
        initial = std::move(tmp.front());
      }
      const auto spikes = well.delta_spikes();
      rec = propagate(initial, spikes, well.nonlinearity, pconf, on_snapshot);
    } else {
      CoupledSystem sys = build_system_from_config(cfg, st, grid);
      perturb_waves(sys.waves, cfg.prop_perturb, cfg.run_seed);
      n_waves = sys.waves.size();
      rec = propagate(sys, pconf, on_snapshot);
    }
  } catch (PropagationAbort& e) {
    rec = std::move(e.partial);
    aborted = true;
    abort_msg = e.what();
  }
  n_waves = rec.norms_per_wave.size();

  std::ostringstream csv;
  csv << "t";
  for (std::size_t w = 0; w < n_waves; ++w) csv << ",norm_psi" << w + 1;
  for (std::size_t w = 0; w < n_waves; ++w) csv << ",overlap_psi" << w + 1;
  csv << ",peak_drift\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    csv << format_double(rec.times[i]);
    for (std::size_t w = 0; w < n_waves; ++w) {
      csv << ',' << format_double(rec.norms_per_wave[w][i]);
    }
    for (std::size_t w = 0; w < n_waves; ++w) {
      csv << ',' << format_double(rec.overlap_with_initial[w][i]);
    }
    csv << ',' << format_double(rec.peak_drift[i]) << "\n";
  }
  write_text(dir / "record.csv", csv.str());

  double norm_drift_per_unit = 0.0;
  if (!rec.times.empty() && rec.times.back() > 0.0) {
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t w = 0; w < n_waves; ++w) {
      n0 += rec.norms_per_wave[w].front() * rec.norms_per_wave[w].front();
      n1 += rec.norms_per_wave[w].back() * rec.norms_per_wave[w].back();
    }
    norm_drift_per_unit = std::abs(n1 - n0) / rec.times.back();
  }

  const double si_ms = reduced_to_si_time(rec.lifetime);
  json j;
  j["lifetime"] = rec.lifetime;
  j["classification"] = stability_name(rec.classification);
  j["si_ms"] = si_ms;
  j["si_ms_rounded"] = std::llround(si_ms);
  j["lifetime_refined"] = rec.lifetime_refined;
  j["norm_drift_per_unit_time"] = norm_drift_per_unit;
  j["coupling_mode"] = coupling_mode_name(pconf.coupling_mode);
  j["dt"] = pconf.dt;
  j["t_final"] = pconf.t_final;
  j["aborted"] = aborted;
  if (aborted) j["abort_message"] = abort_msg;
  write_text(dir / "summary.json", j.dump(2) + "\n");

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "evolve", common.overrides, cfg, wall,
                 {"record.csv", "summary.json"});
  out << j.dump(2) << "\n";
  if (aborted) {
    return kPropagationAbort;
  }
  return kOk;
}

int cmd_convert_time(const CommonArgs& common, double value, double scale,
                     bool have_out_dir, std::ostream& out) {
  const double ms = reduced_to_si_time(value, scale);
  json j;
  j["t_reduced"] = value;
  j["scale_ms_per_unit"] = scale;
  j["ms"] = ms;
  j["ms_rounded"] = std::llround(ms);
  out << j.dump(2) << "\n";
  if (have_out_dir) {
    ExperimentConfig cfg = build_config(common);
    const fs::path dir = resolve_out_dir(common, cfg);
    fs::create_directories(dir);
    write_text(dir / "convert-time.json", j.dump(2) + "\n");
    write_manifest(dir, "convert-time", common.overrides, cfg, 0.0,
                   {"convert-time.json"});
  }
  return kOk;
}

json error_json(const char* type, const std::string& message) {
  json j;
  j["error"] = {{"type", type}, {"message", message}};
  return j;
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"stationary states, feeder environments and split-operator "
               "dynamics of a PT-symmetric double-delta condensate"};
  app.require_subcommand(1);

  CommonArgs c_state, c_spec, c_crit, c_feed, c_locus, c_evolve, c_conv;

  auto* s_state = app.add_subcommand("state", "solve one stationary state");
  add_common(s_state, c_state);

  auto* s_spec = app.add_subcommand("spectrum", "trace mu(gamma) branches");
  add_common(s_spec, c_spec);
  std::string gamma_range = "0:0.45:0.005";
  s_spec->add_option("--gamma", gamma_range, "gamma sweep lo:hi:step");

  auto* s_crit = app.add_subcommand("critical", "locate gamma_c and gamma_c*");
  add_common(s_crit, c_crit);

  auto* s_feed = app.add_subcommand("feeders", "construct a feeder environment");
  add_common(s_feed, c_feed);
  std::string feeder_mode;
  double amplitude = -1.0, psi2_at_0 = -1.0;
  s_feed->add_option("--mode", feeder_mode, "two | single | bound-check");
  s_feed->add_option("--amplitude", amplitude, "coupling-point amplitude (two-feeder)");
  s_feed->add_option("--psi2-at-0", psi2_at_0, "feeder value at the origin (single)");

  auto* s_locus = app.add_subcommand("phase-locus", "psi_c locus over g");
  add_common(s_locus, c_locus);
  std::string g_range = "0.2:1.0:0.2";
  s_locus->add_option("--g-range", g_range, "g sweep lo:hi:step");

  auto* s_evolve = app.add_subcommand("evolve", "split-operator time evolution");
  add_common(s_evolve, c_evolve);
  std::string ev_mode;
  double ev_dt = 0.0, ev_tfinal = 0.0;
  std::string ev_absorb;
  s_evolve->add_option("--mode", ev_mode, "exact-kick | effective-potential");
  s_evolve->add_option("--dt", ev_dt, "time step");
  s_evolve->add_option("--t-final", ev_tfinal, "final time");
  s_evolve->add_option("--absorb", ev_absorb, "on | off boundary mask");

  auto* s_conv = app.add_subcommand("convert-time", "reduced units to milliseconds");
  add_common(s_conv, c_conv);
  double conv_value = 0.0;
  double conv_scale = kMsPerReducedUnit;
  s_conv->add_option("value", conv_value, "time in reduced units")->required();
  s_conv->add_option("--scale", conv_scale, "milliseconds per reduced unit");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      out << app.help() << "\n";
      return kOk;
    }
    out << error_json("config", e.what()).dump(2) << "\n";
    return kConfigError;
  }

  try {
    if (s_state->parsed()) return cmd_state(c_state, out);
    if (s_spec->parsed()) return cmd_spectrum(c_spec, gamma_range, out);
    if (s_crit->parsed()) return cmd_critical(c_crit, out);
    if (s_feed->parsed()) {
      if (!feeder_mode.empty()) c_feed.overrides.push_back("feeder.mode=" + feeder_mode);
      if (amplitude > 0.0) {
        c_feed.overrides.push_back("feeder.amplitude=" + format_double(amplitude));
        c_feed.overrides.push_back("feeder.amplitude3=" + format_double(amplitude));
      }
      if (psi2_at_0 > 0.0) {
        c_feed.overrides.push_back("feeder.psi2_at_0=" + format_double(psi2_at_0));
      }
      return cmd_feeders(c_feed, out);
    }
    if (s_locus->parsed()) return cmd_phase_locus(c_locus, g_range, out);
    if (s_evolve->parsed()) {
      if (!ev_mode.empty()) {
        c_evolve.overrides.push_back("propagation.coupling_mode=" + ev_mode);
      }
      if (ev_dt > 0.0) {
        c_evolve.overrides.push_back("propagation.dt=" + format_double(ev_dt));
      }
      if (ev_tfinal > 0.0) {
        c_evolve.overrides.push_back("propagation.t_final=" + format_double(ev_tfinal));
      }
      if (!ev_absorb.empty()) {
        c_evolve.overrides.push_back("propagation.absorb=" + ev_absorb);
      }
      return cmd_evolve(c_evolve, out);
    }
    if (s_conv->parsed()) {
      return cmd_convert_time(c_conv, conv_value, conv_scale, !c_conv.out_dir.empty(),
                              out);
    }
    out << error_json("config", "unknown subcommand").dump(2) << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    out << error_json("config", e.what()).dump(2) << "\n";
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const PropagationAbort& e) {
    out << error_json("propagation", e.what()).dump(2) << "\n";
    err << "error: " << e.what() << "\n";
    return kPropagationAbort;
  } catch (const SolverError& e) {
    out << error_json("solver", e.what()).dump(2) << "\n";
    err << "error: " << e.what() << "\n";
    return kSolverError;
  } catch (const DomainError& e) {
    out << error_json("config", e.what()).dump(2) << "\n";
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace ptdelta::cli
