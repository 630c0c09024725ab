#pragma once

#include "escflex/scenario.hpp"

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace escflex {

/// FNV-1a 64 over the scenario's canonical on-disk form (save_scenario
/// output, files in name order), as 16 hex digits. Equal scenarios hash
/// equal on every platform.
std::string scenario_hash(const Scenario& scenario);

struct RunManifest {
    std::string command;
    std::string scenario_hash;
    nlohmann::ordered_json config;  // flags and derived settings
    nlohmann::ordered_json solver;  // backend metadata
    std::chrono::system_clock::time_point started, finished;
    std::vector<std::string> outputs;  // relative to the output directory

    std::string to_json() const;
    /// Writes manifest.json into dir, replacing any earlier one.
    void save(const std::filesystem::path& dir) const;
};

}  // namespace escflex
