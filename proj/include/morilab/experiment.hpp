#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "morilab/chain.hpp"
#include "morilab/design.hpp"
#include "morilab/fit.hpp"

namespace morilab {

enum class Scenario { Decay, Oscillation, PathologicalDecay, PathologicalOscillation };
enum class Profile { Desk, Paper };

std::string_view scenario_name(Scenario s) noexcept;
Scenario parse_scenario(std::string_view name);
std::string_view profile_name(Profile p) noexcept;
Profile parse_profile(std::string_view name);
bool is_pathological(Scenario s) noexcept;
bool is_oscillation(Scenario s) noexcept;

struct ScenarioConfig {
    Scenario scenario = Scenario::Decay;
    Profile profile = Profile::Desk;
    std::size_t d = 2000;
    std::size_t n_f = 666;
    std::size_t trials = 200;
    double lambda = 0.5;
    double dt = 0.01;
    double t_max = 30.0;
    std::uint64_t base_seed = 20240611;
    std::size_t n_star = 150;
    double a = 1.2;
    double b1 = 2.0;
    double b2 = 1.6;
    double bin_width = 5e-4;
    EquilibrationOptions equilibration;
};

/// Scenario- and profile-consistent defaults.
ScenarioConfig default_config(Scenario scenario, Profile profile = Profile::Desk);

/// Throws ConfigError naming the first offending key.
void validate(const ScenarioConfig& config);

/// One chain family of a scenario together with its unperturbed reference.
struct Family {
    std::string label;
    ModelClass model = ModelClass::Exp;
    LanczosChain chain;
    CorrelationSeries unperturbed;
    Equilibration unperturbed_eq;
    FitResult unperturbed_fit;
};

struct ScenarioSetup {
    ScenarioConfig config;
    std::vector<Family> families;
};

/// Builds the families and fits their unperturbed curves.
ScenarioSetup prepare(const ScenarioConfig& config);

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::string family;
    FitModel model;
    double epsilon = 0.0;
    double sigma = 0.0;
    /// Residual of the unperturbed fit on this trial's window.
    double epsilon0 = 0.0;
    std::size_t n_eq = 0;
    bool converged = false;
    bool equilibrated = false;
    std::size_t clamp_count = 0;
    bool boundary_flag = false;
    bool valid = false;
    std::string failure;
};

/// Seed of (trial, family) derived from the base seed.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial, std::size_t family_index) noexcept;

/// Runs a single (trial, family) task. `series_out`, when given, receives C~(t).
TrialRecord run_trial(const ScenarioSetup& setup, std::size_t trial, std::size_t family_index,
                      CorrelationSeries* series_out = nullptr);

/// Reference runner: tasks in order on the calling thread.
std::vector<TrialRecord> run_trials_serial(const ScenarioSetup& setup);
/// OpenMP pool over (trial, family) tasks; results are bit-identical to the serial runner.
std::vector<TrialRecord> run_trials_parallel(const ScenarioSetup& setup);

struct Histogram {
    double bin_width = 0.0;
    /// Bin k covers [k w, (k+1) w).
    std::vector<std::size_t> counts;

    double left(std::size_t k) const noexcept { return static_cast<double>(k) * bin_width; }
    double right(std::size_t k) const noexcept { return static_cast<double>(k + 1) * bin_width; }
    std::size_t total() const noexcept;
};

/// Left-closed uniform bins starting at 0; `min_bins` pads with empty bins.
Histogram histogram(const std::vector<double>& values, double bin_width, std::size_t min_bins = 0);

struct FamilySummary {
    std::string label;
    ModelClass model = ModelClass::Exp;
    std::size_t valid = 0;
    std::size_t invalid = 0;
    std::size_t non_equilibrated = 0;
    double mean_epsilon = 0.0;
    double stderr_epsilon = 0.0;
    double mean_sigma = 0.0;
    double stderr_sigma = 0.0;
    Histogram histogram;
    /// (sigma_i, epsilon_i) of valid trials, by trial index.
    std::vector<std::pair<double, double>> scatter;
};

struct EnsembleSummary {
    std::vector<FamilySummary> families;
    std::size_t invalid_trials = 0;
    /// Families with no valid record; left out of `families`.
    std::vector<std::string> omitted;

    const FamilySummary* find(std::string_view label) const noexcept;
};

/// Per-family summary in first-appearance order. Histograms of all families share one bin range.
EnsembleSummary summarize(const std::vector<TrialRecord>& records, double bin_width);

/// Trial indices of the `count` valid records of `label` closest to the family mean, closest first.
std::vector<std::size_t> exemplary_trials(const std::vector<TrialRecord>& records, const FamilySummary& family,
                                          std::size_t count = 3);

struct ScenarioOutcome {
    ScenarioSetup setup;
    std::vector<TrialRecord> records;
    EnsembleSummary summary;
};

enum class Runner { Serial, Parallel };

ScenarioOutcome run_scenario(const ScenarioConfig& config, Runner runner = Runner::Parallel);

}  // namespace morilab
