#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "voltsite/common.hpp"

namespace voltsite {

// Written once per output directory; together with the inputs it pins down
// everything needed to reproduce the run.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  std::string version = kVersion;
  nlohmann::json effective_config;  // defaults, then file, then flag overrides
  std::map<std::string, double> timings_s;
};

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config_path"] = m.config_path;
  j["seeds"] = m.seeds;
  j["out_dir"] = m.out_dir;
  j["version"] = m.version;
  j["effective_config"] = m.effective_config;
  j["timings_s"] = m.timings_s;
  return j;
}

inline void write_manifest(const RunManifest& m, const std::filesystem::path& dir) {
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << manifest_to_json(m).dump(2) << "\n";
}

}  // namespace voltsite
