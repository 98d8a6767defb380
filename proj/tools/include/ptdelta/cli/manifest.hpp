#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ptdelta/cli/config.hpp"

namespace ptdelta::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Per-run manifest: enough to re-run the experiment exactly (full config
/// inline), plus provenance (hash, version, wall time).
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::vector<std::string>& argv, const ExperimentConfig& cfg,
                    double wall_time_s, const std::vector<std::string>& outputs);

}  // namespace ptdelta::cli
