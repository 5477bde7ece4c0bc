#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "morilab/experiment.hpp"

namespace morilab {

inline constexpr const char* tool_version = "0.1.0";

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

struct RunManifest {
    ScenarioConfig config;
    std::string version = tool_version;
    std::string rng;
    double duration_seconds = 0.0;
    int threads = 1;
    /// (file name relative to the output directory, SHA-256).
    std::vector<std::pair<std::string, std::string>> digests;
};

/// Hashes each listed file in `dir`.
RunManifest make_manifest(const ScenarioConfig& config, double duration_seconds,
                          const std::filesystem::path& dir, const std::vector<std::string>& files);

nlohmann::ordered_json manifest_json(const RunManifest& manifest);
/// Reads the config snapshot of a manifest for replay.
ScenarioConfig config_from_manifest(const std::filesystem::path& path);
/// Re-hashes the listed files; returns the names whose digests no longer match.
std::vector<std::string> verify_manifest(const std::filesystem::path& path);

}  // namespace morilab
