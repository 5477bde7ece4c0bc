#include <doctest.h>

#include <filesystem>

#include "morilab/config.hpp"
#include "morilab/error.hpp"
#include "morilab/io.hpp"
#include "morilab/manifest.hpp"
#include "morilab/pipeline.hpp"
#include "morilab/plots.hpp"
#include "morilab/rng.hpp"

using namespace morilab;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("morilab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string key_of(const ordered_json& j, const ConfigOverrides& f = {}) {
    try {
        parse_config(j, f);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

}  // namespace

TEST_CASE("profiles and scenarios select defaults") {
    ConfigOverrides f;
    f.scenario = "decay";
    f.profile = "paper";
    const auto paper = parse_config(ordered_json(nullptr), f);
    CHECK(paper.d == 10000);
    CHECK(paper.n_f == 3333);
    CHECK(paper.trials == 1000);
    CHECK(paper.lambda == 0.5);

    ConfigOverrides g;
    g.scenario = "decay";
    const auto desk = parse_config(ordered_json(nullptr), g);
    CHECK(desk.d == 2000);
    CHECK(desk.trials == 200);
}

TEST_CASE("flags override file values; nf follows d") {
    const ordered_json file = {{"scenario", "pathological_decay"}, {"d", 900}, {"trials", 7}, {"lambda", 0.3}};
    const auto c = parse_config(file);
    CHECK(c.scenario == Scenario::PathologicalDecay);
    CHECK(c.d == 900);
    CHECK(c.n_f == 900);
    CHECK(c.trials == 7);
    ConfigOverrides f;
    f.lambda = 0.2;
    f.d = 1200;
    const auto c2 = parse_config(file, f);
    CHECK(c2.lambda == 0.2);
    CHECK(c2.d == 1200);
    CHECK(c2.n_f == 1200);
    const auto c3 = parse_config(ordered_json{{"d", 900}});
    CHECK(c3.n_f == 300);
}

TEST_CASE("rejections name the key") {
    ConfigOverrides neg;
    neg.lambda = -1.0;
    CHECK(key_of(ordered_json(nullptr), neg) == "lambda");
    CHECK(key_of(ordered_json{{"lamda", 0.5}}) == "lamda");
    CHECK(key_of(ordered_json{{"d", "big"}}) == "d");
    CHECK(key_of(ordered_json{{"d", -5}}) == "d");
    CHECK(key_of(ordered_json{{"trials", 1.5}}) == "trials");
    CHECK(key_of(ordered_json{{"nf", 5000}}) == "nf");
    CHECK(key_of(ordered_json{{"scenario", "drift"}}) == "scenario");
    CHECK(key_of(ordered_json{{"seed", -1}}) == "seed");
    CHECK(key_of(ordered_json::array()) == "config");
}

TEST_CASE("config files: malformed, missing and round trip") {
    const auto dir = scratch("config");
    io::write_text(dir / "bad.json", "{\"d\": 10,");
    try {
        parse_config(std::optional<fs::path>(dir / "bad.json"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "config");
    }
    CHECK_THROWS_AS(parse_config(std::optional<fs::path>(dir / "missing.json")), ConfigError);

    auto c = default_config(Scenario::Oscillation, Profile::Paper);
    c.base_seed = 18446744073709551615ull;
    c.equilibration.window = 3.5;
    io::write_text(dir / "c.json", config_json(c).dump(2));
    const auto back = parse_config(std::optional<fs::path>(dir / "c.json"));
    CHECK(config_json(back) == config_json(c));
}

TEST_CASE("known SHA-256 vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("CSV parsing") {
    const auto t = io::parse_csv("a,b\r\n1,2\n\n3,4\n");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.rows.size() == 2);
    CHECK(t.column("b") == 1);
    CHECK_THROWS_AS(t.column("c"), InvalidArgument);
    CHECK_THROWS_AS(io::parse_csv("a,b\n1\n"), InvalidArgument);
    CHECK_THROWS_AS(io::parse_double("1.5x"), InvalidArgument);
    CHECK(io::parse_double(io::format_double(0.1)) == 0.1);
    CHECK(io::format_double(1.0 / 3.0).size() >= 17);
}

TEST_CASE("run outputs: formats, manifest digests, replay and byte-identical re-plot") {
    auto c = default_config(Scenario::Decay);
    c.d = 500;
    c.n_f = 166;
    c.trials = 4;
    c.dt = 0.02;
    c.t_max = 20.0;
    const auto dir = scratch("run");
    const auto outcome = run_scenario(c);
    const auto art = write_run(outcome, dir, 0.5);

    const auto records = io::parse_csv(io::read_text(dir / "records.csv"));
    CHECK(records.header == std::vector<std::string>{"trial", "seed", "model", "A", "mu", "omega", "phi", "epsilon",
                                                     "sigma", "n_eq", "converged"});
    CHECK(records.rows.size() == 8);
    CHECK(io::parse_csv(io::read_text(dir / "histogram.csv")).header ==
          std::vector<std::string>{"bin_left", "bin_right", "family", "count"});
    CHECK(io::parse_csv(io::read_text(dir / "scatter.csv")).header ==
          std::vector<std::string>{"family", "sigma", "epsilon"});
    const auto summary = ordered_json::parse(io::read_text(dir / "summary.json"));
    CHECK(summary["families"].size() == 2);
    CHECK(summary["families"][0]["exemplary_trials"].size() == 3);

    // Histogram counts add up to the valid trials.
    std::size_t total = 0;
    for (const auto& row : io::parse_csv(io::read_text(dir / "histogram.csv")).rows) total += std::stoul(row[3]);
    CHECK(total == outcome.summary.families[0].valid + outcome.summary.families[1].valid);

    CHECK(verify_manifest(dir / "manifest.json").empty());
    const auto m = ordered_json::parse(io::read_text(dir / "manifest.json"));
    CHECK(m["rng"] == std::string(rng_identifier));
    CHECK(m["outputs"].contains("histogram.svg"));

    const std::string svg = io::read_text(dir / "histogram.svg");
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
    fs::remove(dir / "histogram.svg");
    fs::remove(dir / "scatter.svg");
    plots::render_run(dir);
    CHECK(io::read_text(dir / "histogram.svg") == svg);
    CHECK(verify_manifest(dir / "manifest.json").empty());

    io::write_text(dir / "records.csv", "tampered\n");
    CHECK(verify_manifest(dir / "manifest.json") == std::vector<std::string>{"records.csv"});

    const auto replay = config_from_manifest(dir / "manifest.json");
    CHECK(config_json(replay) == config_json(c));
    (void)art;
}

TEST_CASE("unwritable output is a config error") {
    CHECK_THROWS_AS(io::write_text("/proc/morilab/forbidden.csv", "x"), ConfigError);
}
