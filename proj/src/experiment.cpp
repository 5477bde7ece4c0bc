#include "morilab/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <numeric>

#include <fmt/core.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "morilab/error.hpp"
#include "morilab/kernels.hpp"
#include "morilab/perturbation.hpp"
#include "morilab/propagate.hpp"
#include "morilab/rng.hpp"

namespace morilab {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

Family make_family(std::string label, ModelClass model, LanczosChain chain, const ScenarioConfig& c) {
    Family f;
    f.label = std::move(label);
    f.model = model;
    f.chain = std::move(chain);
    f.chain.set_label(f.label);
    f.unperturbed = propagate(f.chain, c.dt, c.t_max).series;
    f.unperturbed_eq = detect_equilibration(f.unperturbed, c.equilibration);
    const std::size_t n_eq = std::max(f.unperturbed_eq.n_eq, min_fit_samples - 1);
    f.unperturbed_fit = fit(f.unperturbed, model, std::min(n_eq, f.unperturbed.size() - 1));
    return f;
}

}  // namespace

std::string_view scenario_name(Scenario s) noexcept {
    switch (s) {
        case Scenario::Decay: return "decay";
        case Scenario::Oscillation: return "oscillation";
        case Scenario::PathologicalDecay: return "pathological_decay";
        case Scenario::PathologicalOscillation: return "pathological_oscillation";
    }
    return "decay";
}

Scenario parse_scenario(std::string_view name) {
    const std::string s = lowercase(name);
    for (Scenario v : {Scenario::Decay, Scenario::Oscillation, Scenario::PathologicalDecay,
                       Scenario::PathologicalOscillation}) {
        if (s == scenario_name(v)) return v;
    }
    throw ConfigError("scenario", fmt::format("unknown scenario '{}' (expected decay, oscillation, "
                                              "pathological_decay or pathological_oscillation)", name));
}

std::string_view profile_name(Profile p) noexcept { return p == Profile::Paper ? "paper" : "desk"; }

Profile parse_profile(std::string_view name) {
    const std::string s = lowercase(name);
    if (s == "desk") return Profile::Desk;
    if (s == "paper") return Profile::Paper;
    throw ConfigError("profile", fmt::format("unknown profile '{}' (expected desk or paper)", name));
}

bool is_pathological(Scenario s) noexcept {
    return s == Scenario::PathologicalDecay || s == Scenario::PathologicalOscillation;
}

bool is_oscillation(Scenario s) noexcept {
    return s == Scenario::Oscillation || s == Scenario::PathologicalOscillation;
}

ScenarioConfig default_config(Scenario scenario, Profile profile) {
    ScenarioConfig c;
    c.scenario = scenario;
    c.profile = profile;
    const bool paper = profile == Profile::Paper;
    c.d = paper ? 10000 : 2000;
    c.trials = paper ? 1000 : 200;
    c.n_f = is_pathological(scenario) ? c.d : (paper ? 3333 : c.d / 3);
    c.lambda = is_oscillation(scenario) ? 0.1 : 0.5;
    // Horizons end before the wavefront reaches the last percent of the chain.
    c.t_max = is_oscillation(scenario) ? 25.0 : (paper ? 45.0 : 30.0);
    c.bin_width = is_pathological(scenario) ? 5e-3 : 5e-4;
    return c;
}

void validate(const ScenarioConfig& c) {
    auto require = [](bool ok, const char* key, const std::string& what) {
        if (!ok) throw ConfigError(key, what);
    };
    require(c.d >= 3, "d", fmt::format("chain dimension must be at least 3, got {}", c.d));
    require(c.n_f >= 1 && c.n_f <= c.d, "nf", fmt::format("need 1 <= nf <= d = {}, got {}", c.d, c.n_f));
    require(c.trials >= 1, "trials", "need at least one trial");
    require(std::isfinite(c.lambda) && c.lambda >= 0.0, "lambda",
            fmt::format("perturbation strength must be finite and >= 0, got {}", c.lambda));
    require(std::isfinite(c.dt) && c.dt > 0.0, "dt", fmt::format("time step must be positive, got {}", c.dt));
    require(std::isfinite(c.t_max) && c.t_max > 0.0, "tmax", fmt::format("horizon must be positive, got {}", c.t_max));
    require(c.t_max / c.dt + 1.0 >= static_cast<double>(min_fit_samples), "tmax",
            fmt::format("horizon {} holds fewer than {} samples at dt = {}", c.t_max, min_fit_samples, c.dt));
    require(c.n_star >= 1 && c.n_star < c.d, "nstar", fmt::format("need 1 <= nstar < d, got {}", c.n_star));
    require(std::isfinite(c.a) && c.a > 0.0, "a", "head coefficient must be positive");
    require(std::isfinite(c.b1) && c.b1 > 0.0, "b1", "head coefficient must be positive");
    require(std::isfinite(c.b2) && c.b2 > 0.0, "b2", "head coefficient must be positive");
    require(std::isfinite(c.bin_width) && c.bin_width > 0.0, "bin_width", "histogram bin width must be positive");
    require(c.equilibration.threshold > 0.0, "eq_threshold", "equilibration threshold must be positive");
    require(c.equilibration.window >= 0.0, "eq_window", "equilibration window must be non-negative");
}

ScenarioSetup prepare(const ScenarioConfig& config) {
    validate(config);
    ScenarioSetup s;
    s.config = config;
    if (is_oscillation(config.scenario)) {
        auto gdo = gdo_chain(config.d);
        LanczosChain edo = edo_chain(config.b1, config.b2, gdo.tail, config.d);
        s.families.push_back(make_family("gdo", ModelClass::GaussCos, std::move(gdo.chain), config));
        s.families.push_back(make_family("edo", ModelClass::ExpCos, std::move(edo), config));
    } else {
        s.families.push_back(make_family("g", ModelClass::Gauss, gaussian_chain(config.n_star, config.d), config));
        s.families.push_back(
            make_family("e", ModelClass::Exp, exponential_chain(config.a, config.n_star, config.d), config));
    }
    return s;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial, std::size_t family_index) noexcept {
    return derive_seed(base_seed, trial, family_index);
}

TrialRecord run_trial(const ScenarioSetup& setup, std::size_t trial, std::size_t family_index,
                      CorrelationSeries* series_out) {
    const ScenarioConfig& c = setup.config;
    const Family& fam = setup.families.at(family_index);
    TrialRecord r;
    r.trial = trial;
    r.family = fam.label;
    r.model.cls = fam.model;
    r.seed = trial_seed(c.base_seed, trial, family_index);
    try {
        const PerturbationDraw draw = draw_noise(c.d, c.n_f, r.seed);
        const PerturbedChain pc = apply(fam.chain, c.lambda, draw);
        r.clamp_count = pc.clamp_count;
        const PropagationResult prop = propagate(pc.perturbed, c.dt, c.t_max);
        r.boundary_flag = prop.boundary_flag;
        const CorrelationSeries& series = prop.series;

        const Equilibration eq = detect_equilibration(series, c.equilibration);
        r.equilibrated = eq.equilibrated;
        r.n_eq = std::min(std::max(eq.n_eq, min_fit_samples - 1), series.size() - 1);

        FitOptions options;
        options.warm_start = fam.unperturbed_fit.model;
        const FitResult fr = fit(series, fam.model, r.n_eq, options);
        r.model = fr.model;
        r.epsilon = fr.epsilon;
        r.converged = fr.converged;
        r.sigma = sigma(series, fam.unperturbed, r.n_eq);
        r.epsilon0 = epsilon(fam.unperturbed, fam.unperturbed_fit.model, r.n_eq);
        r.valid = pc.valid && fr.converged;
        if (!pc.valid) r.failure = fmt::format("{} coefficients clamped", pc.clamp_count);
        else if (!fr.converged) r.failure = "fit did not converge";
        if (series_out) *series_out = series;
    } catch (const std::exception& e) {
        r.valid = false;
        r.failure = e.what();
    }
    return r;
}

std::vector<TrialRecord> run_trials_serial(const ScenarioSetup& setup) {
    const std::size_t families = setup.families.size();
    std::vector<TrialRecord> out(setup.config.trials * families);
    for (std::size_t task = 0; task < out.size(); ++task) {
        out[task] = run_trial(setup, task / families, task % families);
    }
    return out;
}

std::vector<TrialRecord> run_trials_parallel(const ScenarioSetup& setup) {
    const std::size_t families = setup.families.size();
    const auto tasks = static_cast<std::ptrdiff_t>(setup.config.trials * families);
    std::vector<TrialRecord> out(static_cast<std::size_t>(tasks));
    // run_trial catches everything, so no exception escapes the parallel region.
#pragma omp parallel for schedule(dynamic, 1) num_threads(kernels::worker_count())
    for (std::ptrdiff_t task = 0; task < tasks; ++task) {
        const auto t = static_cast<std::size_t>(task);
        out[t] = run_trial(setup, t / families, t % families);
    }
    return out;
}

std::size_t Histogram::total() const noexcept { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

Histogram histogram(const std::vector<double>& values, double bin_width, std::size_t min_bins) {
    if (!(bin_width > 0.0)) throw InvalidArgument("histogram: bin width must be positive");
    Histogram h;
    h.bin_width = bin_width;
    h.counts.assign(min_bins, 0);
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("histogram: values must be finite and >= 0");
        const auto k = static_cast<std::size_t>(std::floor(v / bin_width));
        if (k >= h.counts.size()) h.counts.resize(k + 1, 0);
        ++h.counts[k];
    }
    return h;
}

const FamilySummary* EnsembleSummary::find(std::string_view label) const noexcept {
    for (const auto& f : families)
        if (f.label == label) return &f;
    return nullptr;
}

EnsembleSummary summarize(const std::vector<TrialRecord>& records, double bin_width) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const TrialRecord*>> by_family;
    for (const auto& r : records) {
        if (!by_family.contains(r.family)) order.push_back(r.family);
        by_family[r.family].push_back(&r);
    }
    EnsembleSummary s;
    std::size_t bins = 0;
    for (const auto& label : order) {
        auto group = by_family[label];
        std::sort(group.begin(), group.end(), [](auto* a, auto* b) { return a->trial < b->trial; });
        FamilySummary f;
        f.label = label;
        f.model = group.front()->model.cls;
        std::vector<double> eps, sig;
        for (const TrialRecord* r : group) {
            if (!r->valid) {
                ++f.invalid;
                continue;
            }
            ++f.valid;
            if (!r->equilibrated) ++f.non_equilibrated;
            eps.push_back(r->epsilon);
            sig.push_back(r->sigma);
            f.scatter.emplace_back(r->sigma, r->epsilon);
        }
        s.invalid_trials += f.invalid;
        if (f.valid == 0) {
            s.omitted.push_back(label);
            continue;
        }
        f.mean_epsilon = mean_of(eps);
        f.stderr_epsilon = stderr_of(eps, f.mean_epsilon);
        f.mean_sigma = mean_of(sig);
        f.stderr_sigma = stderr_of(sig, f.mean_sigma);
        f.histogram = histogram(eps, bin_width);
        bins = std::max(bins, f.histogram.counts.size());
        s.families.push_back(std::move(f));
    }
    for (auto& f : s.families) f.histogram.counts.resize(bins, 0);
    return s;
}

std::vector<std::size_t> exemplary_trials(const std::vector<TrialRecord>& records, const FamilySummary& family,
                                          std::size_t count) {
    std::vector<const TrialRecord*> pool;
    for (const auto& r : records)
        if (r.valid && r.family == family.label) pool.push_back(&r);
    std::stable_sort(pool.begin(), pool.end(), [&](auto* a, auto* b) {
        const double da = std::abs(a->epsilon - family.mean_epsilon);
        const double db = std::abs(b->epsilon - family.mean_epsilon);
        return da != db ? da < db : a->trial < b->trial;
    });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < std::min(count, pool.size()); ++i) out.push_back(pool[i]->trial);
    return out;
}

ScenarioOutcome run_scenario(const ScenarioConfig& config, Runner runner) {
    ScenarioOutcome out;
    out.setup = prepare(config);
    out.records = runner == Runner::Serial ? run_trials_serial(out.setup) : run_trials_parallel(out.setup);
    out.summary = summarize(out.records, config.bin_width);
    return out;
}

}  // namespace morilab
