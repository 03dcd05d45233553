#pragma once

// Named, reproducible runs. Each scenario writes CSV tables, summary.json
// and manifest.json into its output directory.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "stimem/config.hpp"

namespace stimem {

struct ScenarioInfo {
  std::string name;
  std::string figure;
  std::string description;
  // Config key that --phi overrides; empty if the scenario has no phase input.
  std::string phase_key;
};

// Stable order.
const std::vector<ScenarioInfo>& list_scenarios();
const ScenarioInfo& find_scenario(const std::string& name);

// Schema with the scenario's published defaults applied.
Config default_config(const std::string& scenario);

// Runs the scenario, writes its files, and returns the summary.
// The manifest is the only file carrying a timestamp.
nlohmann::json run_scenario(const std::string& scenario, const Config& config,
                            const std::filesystem::path& out_dir);

}  // namespace stimem
