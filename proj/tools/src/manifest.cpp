#include "ptdelta/cli/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace ptdelta::cli {

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::vector<std::string>& argv, const ExperimentConfig& cfg,
                    double wall_time_s, const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["argv"] = argv;
  j["version"] = kVersion;
  std::ostringstream hash;
  hash << std::hex << config_hash(cfg);
  j["config_hash"] = hash.str();
  j["wall_time_s"] = wall_time_s;
  j["outputs"] = outputs;
  j["seed"] = cfg.run_seed;
  j["config"] = serialize_config(cfg);
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << "\n";
}

}  // namespace ptdelta::cli
