#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ptdelta::cli {

/// Exit codes: 0 ok, 2 config error, 3 solver non-convergence,
/// 4 propagation abort.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kSolverError = 3,
  kPropagationAbort = 4,
};

/// Dispatch one subcommand (state, spectrum, critical, feeders, phase-locus,
/// evolve, convert-time). Artifacts land in the output directory; failures
/// print machine-readable JSON to `out` and return the matching exit code.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err);

}  // namespace ptdelta::cli
