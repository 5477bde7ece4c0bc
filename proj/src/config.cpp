#include "morilab/config.hpp"

#include <array>
#include <cmath>
#include <string_view>

#include <fmt/core.h>

#include "morilab/error.hpp"
#include "morilab/io.hpp"

namespace morilab {

namespace {

using nlohmann::ordered_json;

constexpr std::array<std::string_view, 16> known_keys = {
    "scenario", "profile", "d", "nf", "trials", "lambda", "dt", "tmax",
    "seed", "nstar", "a", "b1", "b2", "bin_width", "eq_threshold", "eq_window"};

std::size_t as_count(std::int64_t v, const char* key) {
    if (v < 0) throw ConfigError(key, fmt::format("must be non-negative, got {}", v));
    return static_cast<std::size_t>(v);
}

std::int64_t json_integer(const ordered_json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (std::floor(x) == x && std::abs(x) < 9e15) return static_cast<std::int64_t>(x);
    }
    throw ConfigError(key, fmt::format("expected an integer, got {}", v.dump()));
}

double json_number(const ordered_json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(key, fmt::format("expected a number, got {}", v.dump()));
    return v.get<double>();
}

std::string json_string(const ordered_json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_string()) throw ConfigError(key, fmt::format("expected a string, got {}", v.dump()));
    return v.get<std::string>();
}

std::uint64_t json_seed(const ordered_json& j) {
    const auto& v = j.at("seed");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError("seed", fmt::format("expected a non-negative integer, got {}", v.dump()));
}

}  // namespace

ScenarioConfig parse_config(const ordered_json& file, const ConfigOverrides& flags) {
    if (!file.is_null() && !file.is_object()) throw ConfigError("config", "top level must be a JSON object");
    if (file.is_object()) {
        for (const auto& [key, _] : file.items()) {
            bool known = false;
            for (auto k : known_keys) known = known || key == k;
            if (!known) throw ConfigError(key, "unknown configuration key");
        }
    }
    auto has = [&](const char* key) { return file.is_object() && file.contains(key); };

    const Scenario scenario = parse_scenario(flags.scenario ? *flags.scenario
                                             : has("scenario") ? json_string(file, "scenario")
                                                               : std::string("decay"));
    const Profile profile = parse_profile(flags.profile ? *flags.profile
                                          : has("profile") ? json_string(file, "profile")
                                                           : std::string("desk"));
    ScenarioConfig c = default_config(scenario, profile);

    auto pick_count = [&](const std::optional<std::int64_t>& flag, const char* key, std::size_t& target) {
        if (flag) target = as_count(*flag, key);
        else if (has(key)) target = as_count(json_integer(file, key), key);
        else return false;
        return true;
    };
    auto pick_number = [&](const std::optional<double>& flag, const char* key, double& target) {
        if (flag) target = *flag;
        else if (has(key)) target = json_number(file, key);
    };

    const bool d_set = pick_count(flags.d, "d", c.d);
    const bool nf_set = pick_count(flags.nf, "nf", c.n_f);
    // Keep the cutoff rule when only d moves.
    if (d_set && !nf_set) c.n_f = is_pathological(scenario) ? c.d : c.d / 3;
    pick_count(flags.trials, "trials", c.trials);
    pick_count(flags.nstar, "nstar", c.n_star);
    pick_number(flags.lambda, "lambda", c.lambda);
    pick_number(flags.dt, "dt", c.dt);
    pick_number(flags.tmax, "tmax", c.t_max);
    if (flags.seed) c.base_seed = *flags.seed;
    else if (has("seed")) c.base_seed = json_seed(file);
    pick_number(std::nullopt, "a", c.a);
    pick_number(std::nullopt, "b1", c.b1);
    pick_number(std::nullopt, "b2", c.b2);
    pick_number(std::nullopt, "bin_width", c.bin_width);
    pick_number(std::nullopt, "eq_threshold", c.equilibration.threshold);
    pick_number(std::nullopt, "eq_window", c.equilibration.window);

    validate(c);
    return c;
}

ScenarioConfig parse_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& flags) {
    if (!file) return parse_config(ordered_json(nullptr), flags);
    std::string text;
    try {
        text = io::read_text(*file);
    } catch (const ConfigError&) {
        throw ConfigError("config", fmt::format("cannot read config file '{}'", file->string()));
    }
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", fmt::format("malformed JSON in '{}': {}", file->string(), e.what()));
    }
    return parse_config(j, flags);
}

ordered_json config_json(const ScenarioConfig& c) {
    ordered_json j;
    j["scenario"] = std::string(scenario_name(c.scenario));
    j["profile"] = std::string(profile_name(c.profile));
    j["d"] = c.d;
    j["nf"] = c.n_f;
    j["trials"] = c.trials;
    j["lambda"] = c.lambda;
    j["dt"] = c.dt;
    j["tmax"] = c.t_max;
    j["seed"] = c.base_seed;
    j["nstar"] = c.n_star;
    j["a"] = c.a;
    j["b1"] = c.b1;
    j["b2"] = c.b2;
    j["bin_width"] = c.bin_width;
    j["eq_threshold"] = c.equilibration.threshold;
    j["eq_window"] = c.equilibration.window;
    return j;
}

}  // namespace morilab
