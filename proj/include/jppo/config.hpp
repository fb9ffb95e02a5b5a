#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "jppo/agent.hpp"
#include "jppo/compressor.hpp"
#include "jppo/env.hpp"
#include "jppo/resource.hpp"

namespace jppo::config {

struct OracleOptions {
  std::size_t episodes_per_cell = 200;
  double max_violation_rate = 0.0;
  std::size_t workers = 1;
};

// Everything a run needs. `env.resource` timing fields are fitted from
// `calibration` unless the config supplies them explicitly.
struct RunConfig {
  std::uint64_t seed = 20241127;
  std::filesystem::path corpus;
  env::EnvConfig env;
  agent::AgentConfig agent;
  resource::CalibrationAnchors calibration;
  OracleOptions oracle;
  // True when the file set action_space.compression_levels; the `grid`
  // subcommand otherwise uses ten levels 1..10.
  bool compression_levels_explicit = false;
  // "calibrated" when the timing model came from `calibration`, else "manual".
  std::string resource_source = "calibrated";
};

std::filesystem::path default_corpus_path();

// Validates every section; unknown keys and invariant violations raise
// ConfigError carrying the key path.
RunConfig from_json(const nlohmann::json& j);
// A relative corpus path in the file is taken relative to the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig default_config();
// Effective configuration, including fitted resource values; from_json of the
// result reproduces the same RunConfig.
nlohmann::json to_json(const RunConfig& config);

// Fits the timing model from the anchors, the default channel at P_th and g = 1.
resource::CalibrationResult run_calibration(const RunConfig& config);

compressor::Prompt load_prompt(const std::filesystem::path& path);
// A directory of *.json prompt files (sorted by file name) or a single file
// holding either one prompt object or an array of them.
std::vector<compressor::Prompt> load_corpus(const std::filesystem::path& path);

}  // namespace jppo::config
