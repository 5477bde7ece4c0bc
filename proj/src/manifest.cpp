#include "morilab/manifest.hpp"

#include <array>

#include <fmt/core.h>
#include <openssl/evp.h>

#include "morilab/config.hpp"
#include "morilab/error.hpp"
#include "morilab/io.hpp"
#include "morilab/kernels.hpp"
#include "morilab/rng.hpp"

namespace morilab {

std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

RunManifest make_manifest(const ScenarioConfig& config, double duration_seconds, const std::filesystem::path& dir,
                          const std::vector<std::string>& files) {
    RunManifest m;
    m.config = config;
    m.rng = std::string(rng_identifier);
    m.duration_seconds = duration_seconds;
    m.threads = kernels::worker_count();
    for (const auto& f : files) m.digests.emplace_back(f, sha256_hex(io::read_text(dir / f)));
    return m;
}

nlohmann::ordered_json manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["tool"] = "morilab";
    j["version"] = m.version;
    j["rng"] = m.rng;
    j["threads"] = m.threads;
    j["duration_seconds"] = m.duration_seconds;
    j["config"] = config_json(m.config);
    nlohmann::ordered_json d = nlohmann::ordered_json::object();
    for (const auto& [name, digest] : m.digests) d[name] = digest;
    j["outputs"] = std::move(d);
    return j;
}

namespace {

nlohmann::ordered_json load(const std::filesystem::path& path) {
    try {
        return nlohmann::ordered_json::parse(io::read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("replay", fmt::format("malformed manifest '{}': {}", path.string(), e.what()));
    }
}

}  // namespace

ScenarioConfig config_from_manifest(const std::filesystem::path& path) {
    const auto j = load(path);
    if (!j.contains("config")) throw ConfigError("replay", "manifest has no config snapshot");
    if (j.value("rng", std::string{}) != rng_identifier) {
        throw ConfigError("replay", fmt::format("manifest was produced with RNG '{}', this build uses '{}'",
                                                j.value("rng", std::string{}), rng_identifier));
    }
    return parse_config(j.at("config"));
}

std::vector<std::string> verify_manifest(const std::filesystem::path& path) {
    const auto j = load(path);
    std::vector<std::string> bad;
    const auto dir = path.parent_path();
    for (const auto& [name, digest] : j.at("outputs").items()) {
        std::string actual;
        try {
            actual = sha256_hex(io::read_text(dir / name));
        } catch (const ConfigError&) {
        }
        if (actual != digest.get<std::string>()) bad.push_back(name);
    }
    return bad;
}

}  // namespace morilab
