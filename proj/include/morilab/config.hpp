#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "morilab/experiment.hpp"

namespace morilab {

/// Command-line values; anything set here wins over the config file.
struct ConfigOverrides {
    std::optional<std::string> scenario;
    std::optional<std::string> profile;
    std::optional<std::int64_t> d;
    std::optional<std::int64_t> nf;
    std::optional<std::int64_t> trials;
    std::optional<double> lambda;
    std::optional<double> dt;
    std::optional<double> tmax;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> nstar;
};

/// Scenario and profile pick the defaults, then file keys apply, then flags. Unknown
/// keys, wrong types and out-of-range values raise ConfigError naming the key.
ScenarioConfig parse_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& flags = {});
ScenarioConfig parse_config(const nlohmann::ordered_json& file, const ConfigOverrides& flags = {});

/// Inverse of parse_config: a file holding every key.
nlohmann::ordered_json config_json(const ScenarioConfig& config);

}  // namespace morilab
