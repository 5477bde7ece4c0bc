// morilab command-line front end.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "morilab/config.hpp"
#include "morilab/design.hpp"
#include "morilab/error.hpp"
#include "morilab/experiment.hpp"
#include "morilab/fit.hpp"
#include "morilab/io.hpp"
#include "morilab/manifest.hpp"
#include "morilab/perturbation.hpp"
#include "morilab/pipeline.hpp"
#include "morilab/plots.hpp"
#include "morilab/propagate.hpp"
#include "morilab/reverse.hpp"

namespace fs = std::filesystem;
using namespace morilab;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

void emit(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") std::cout << content;
    else io::write_text(out, content);
}

std::size_t positive_count(std::int64_t v, const char* key) {
    if (v < 1) throw ConfigError(key, fmt::format("must be at least 1, got {}", v));
    return static_cast<std::size_t>(v);
}

struct DesignArgs {
    std::string family = "gaussian";
    std::int64_t nstar = 150;
    std::int64_t d = 2000;
    double a = 1.2, b1 = 2.0, b2 = 1.6;
    std::string out;
    bool json = false;
};

int cmd_design(const DesignArgs& a) {
    const std::size_t d = positive_count(a.d, "d");
    const std::size_t nstar = positive_count(a.nstar, "nstar");
    if (nstar >= d) throw ConfigError("nstar", fmt::format("must be below d = {}", d));
    LanczosChain chain;
    if (a.family == "gaussian" || a.family == "g") {
        chain = gaussian_chain(nstar, d);
    } else if (a.family == "exponential" || a.family == "e") {
        chain = exponential_chain(a.a, nstar, d);
    } else if (a.family == "gdo") {
        chain = gdo_chain(d).chain;
    } else if (a.family == "edo") {
        chain = edo_chain(a.b1, a.b2, gdo_chain(d).tail, d);
    } else {
        throw ConfigError("family", fmt::format("unknown family '{}' (gaussian, exponential, gdo, edo)", a.family));
    }
    emit(a.out, a.json ? io::chain_json(chain).dump(2) + "\n" : io::chain_csv(chain));
    return 0;
}

struct PropagateArgs {
    std::string chain;
    double dt = 0.01, tmax = 30.0;
    std::string method = "chebyshev";
    double substep = 0.0;
    std::string out;
};

int cmd_propagate(const PropagateArgs& a) {
    const LanczosChain chain = io::chain_from_csv(io::read_text(a.chain));
    PropagationOptions opt;
    if (a.method == "rk4") opt.method = PropagatorMethod::RungeKutta4;
    else if (a.method != "chebyshev") throw ConfigError("method", "expected chebyshev or rk4");
    opt.rk4_substep = a.substep;
    const auto res = propagate(chain, a.dt, a.tmax, opt);
    if (res.boundary_flag) {
        std::cerr << fmt::format("warning: weight {:.2e} reached the chain end; shorten tmax or enlarge d\n",
                                 res.max_boundary_weight);
    }
    emit(a.out, io::series_csv(res.series));
    return 0;
}

struct ReverseArgs {
    std::string target;
    std::string series;
    std::int64_t n = 50;
    std::int64_t d = 0;
    std::int64_t fit_points = 10, blend = 10;
    double points_per_unit = 40.0;
    std::string out;
};

int cmd_reverse(const ReverseArgs& a) {
    if (a.target.empty() == a.series.empty()) throw ConfigError("target", "give exactly one of --target or --series");
    QuadratureOptions q;
    q.points_per_unit = a.points_per_unit;
    SpectralDensityInput spectrum;
    if (!a.target.empty()) {
        CorrelationForm form;
        try {
            form = parse_correlation_form(a.target);
        } catch (const InvalidArgument& e) {
            throw ConfigError("target", e.what());
        }
        spectrum = fourier_of_correlation(form, q);
    } else {
        spectrum = fourier_of_correlation(io::series_from_csv(io::read_text(a.series)), q);
    }
    for (const auto& w : spectrum.warnings) std::cerr << "warning: " << w << "\n";
    const ReverseResult r = lanczos_from_spectrum(spectrum, positive_count(a.n, "n"));
    std::vector<double> b = r.b;
    auto sidecar = io::reverse_sidecar(spectrum, r, q);
    if (a.d > 0) {
        ContinuationOptions co;
        co.fit_points = positive_count(a.fit_points, "fit-points");
        co.blend_window = static_cast<std::size_t>(std::max<std::int64_t>(0, a.blend));
        const auto cont = linear_continuation(r.b, static_cast<std::size_t>(a.d), co);
        b.assign(cont.chain.coefficients().begin(), cont.chain.coefficients().end());
        sidecar["continuation"] = {{"d", a.d}, {"fit_points", co.fit_points}, {"blend_window", co.blend_window},
                                   {"slope", cont.tail.slope}, {"intercept", cont.tail.intercept}};
    }
    emit(a.out, io::reverse_csv(b, r.achieved));
    if (!a.out.empty() && a.out != "-") io::write_text(a.out + ".json", sidecar.dump(2) + "\n");
    else std::cerr << sidecar.dump(2) << "\n";
    return 0;
}

struct PerturbArgs {
    std::string chain;
    std::int64_t d = 0;
    std::int64_t nf = 0;
    std::uint64_t seed = 1;
    double lambda = 0.5;
    std::string out;
    std::string chain_out;
};

int cmd_perturb(const PerturbArgs& a) {
    std::optional<LanczosChain> chain;
    if (!a.chain.empty()) chain = io::chain_from_csv(io::read_text(a.chain));
    const std::size_t d = chain ? chain->dimension() : positive_count(a.d, "d");
    const std::size_t nf = a.nf > 0 ? static_cast<std::size_t>(a.nf) : d / 3;
    if (nf < 1 || nf > d) throw ConfigError("nf", fmt::format("need 1 <= nf <= d = {}", d));
    if (!(a.lambda >= 0.0)) throw ConfigError("lambda", "must be non-negative");
    const auto draw = draw_noise(d, nf, a.seed);
    auto j = io::draw_json(draw);
    if (chain) {
        const auto p = apply(*chain, a.lambda, draw);
        const auto rep = scaling_check(p);
        j["lambda"] = a.lambda;
        j["clamp_count"] = p.clamp_count;
        j["valid"] = p.valid;
        j["relative_cross"] = rep.relative_cross;
        j["cross_term"] = rep.cross_term;
        if (!a.chain_out.empty()) io::write_text(a.chain_out, io::chain_csv(p.perturbed));
    }
    emit(a.out, j.dump(2) + "\n");
    return 0;
}

struct FitArgs {
    std::string series;
    std::string model = "EXP";
    std::int64_t n_eq = -1;
    std::string out;
};

int cmd_fit(const FitArgs& a) {
    const auto series = io::series_from_csv(io::read_text(a.series));
    ModelClass cls;
    try {
        cls = parse_model_class(a.model);
    } catch (const InvalidArgument& e) {
        throw ConfigError("model", e.what());
    }
    const auto eq = detect_equilibration(series);
    std::size_t n_eq = eq.n_eq;
    if (a.n_eq >= 0) n_eq = static_cast<std::size_t>(a.n_eq);
    if (n_eq + 1 < min_fit_samples || n_eq >= series.size()) {
        throw ConfigError("n-eq", fmt::format("need {} <= n-eq <= {}", min_fit_samples - 1, series.size() - 1));
    }
    const auto r = fit(series, cls, n_eq);
    auto j = io::fit_json(r);
    j["equilibrated"] = a.n_eq >= 0 ? true : eq.equilibrated;
    emit(a.out, j.dump(2) + "\n");
    return 0;
}

struct RunArgs {
    ConfigOverrides flags;
    std::string config;
    std::string replay;
    std::string out = "morilab-run";
    bool serial = false;
};

int cmd_run(const RunArgs& a) {
    ScenarioConfig cfg;
    if (!a.replay.empty()) {
        cfg = config_from_manifest(a.replay);
    } else {
        cfg = parse_config(a.config.empty() ? std::nullopt : std::optional<fs::path>(a.config), a.flags);
    }
    const auto start = std::chrono::steady_clock::now();
    const auto outcome = run_scenario(cfg, a.serial ? Runner::Serial : Runner::Parallel);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_run(outcome, a.out, seconds);
    for (const auto& f : outcome.summary.families) {
        std::cout << fmt::format("{:>4} {:<9} mean eps {:.5f} +- {:.5f}  mean sigma {:.5f}  valid {}  "
                                 "non-equilibrated {}\n",
                                 f.label, model_name(f.model), f.mean_epsilon, f.stderr_epsilon, f.mean_sigma,
                                 f.valid, f.non_equilibrated);
    }
    for (const auto& label : outcome.summary.omitted) std::cout << "family " << label << ": no valid trials\n";
    if (outcome.summary.invalid_trials > 0) {
        std::cout << outcome.summary.invalid_trials << " invalid trials (see summary.json)\n";
    }
    std::cout << fmt::format("wrote {} in {:.1f} s\n", a.out, seconds);
    return 0;
}

int cmd_plot(const std::string& dir) {
    for (const auto& f : plots::render_run(dir)) std::cout << (fs::path(dir) / f).string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mori-chain stability laboratory"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    DesignArgs design;
    auto* sd = app.add_subcommand("design", "Emit a designed coefficient chain");
    sd->add_option("--family", design.family, "gaussian, exponential, gdo or edo")->capture_default_str();
    sd->add_option("--nstar", design.nstar, "Transition index n*")->capture_default_str();
    sd->add_option("--d", design.d, "Chain dimension")->capture_default_str();
    sd->add_option("--a", design.a, "First exponential-design coefficient")->capture_default_str();
    sd->add_option("--b1", design.b1)->capture_default_str();
    sd->add_option("--b2", design.b2)->capture_default_str();
    sd->add_option("--out", design.out, "Output file (stdout if omitted)");
    sd->add_flag("--json", design.json, "JSON instead of CSV");

    PropagateArgs prop;
    auto* sp = app.add_subcommand("propagate", "Chain CSV to C(t) CSV");
    sp->add_option("--chain", prop.chain, "Chain CSV (n,b)")->required();
    sp->add_option("--dt", prop.dt)->capture_default_str();
    sp->add_option("--tmax", prop.tmax)->capture_default_str();
    sp->add_option("--method", prop.method, "chebyshev or rk4")->capture_default_str();
    sp->add_option("--substep", prop.substep, "Runge-Kutta substep (0: automatic)");
    sp->add_option("--out", prop.out);

    ReverseArgs rev;
    auto* sr = app.add_subcommand("reverse", "Lanczos coefficients from a correlation function");
    sr->add_option("--target", rev.target, "Closed form, e.g. \"exp(-t^2/8)*cos(2t)\"");
    sr->add_option("--series", rev.series, "Sampled C(t) CSV (t,C)");
    sr->add_option("--n", rev.n, "Requested coefficients")->capture_default_str();
    sr->add_option("--d", rev.d, "Continue linearly up to this dimension");
    sr->add_option("--fit-points", rev.fit_points)->capture_default_str();
    sr->add_option("--blend", rev.blend)->capture_default_str();
    sr->add_option("--points-per-unit", rev.points_per_unit)->capture_default_str();
    sr->add_option("--out", rev.out, "CSV path; a .json sidecar is written next to it");

    PerturbArgs pert;
    auto* spt = app.add_subcommand("perturb", "Draw one band-limited perturbation");
    spt->add_option("--chain", pert.chain, "Chain to perturb (optional)");
    spt->add_option("--d", pert.d, "Dimension when no chain is given");
    spt->add_option("--nf", pert.nf, "Frequency cutoff (default d/3)");
    spt->add_option("--seed", pert.seed)->capture_default_str();
    spt->add_option("--lambda", pert.lambda)->capture_default_str();
    spt->add_option("--out", pert.out, "Draw JSON");
    spt->add_option("--chain-out", pert.chain_out, "Perturbed chain CSV");

    FitArgs fa;
    auto* sf = app.add_subcommand("fit", "Fit a model class to C(t)");
    sf->add_option("--series", fa.series)->required();
    sf->add_option("--model", fa.model, "EXP, GAUSS, EXP_COS or GAUSS_COS")->capture_default_str();
    sf->add_option("--n-eq", fa.n_eq, "Equilibration index (default: detected)");
    sf->add_option("--out", fa.out);

    RunArgs run;
    auto* sru = app.add_subcommand("run", "Run a full perturbation ensemble");
    auto opt = [&](const char* name, auto& target, const char* help) {
        sru->add_option_function<std::decay_t<decltype(*target)>>(name, [&target](const auto& v) { target = v; },
                                                                   help);
    };
    opt("--scenario", run.flags.scenario, "decay, oscillation, pathological_decay, pathological_oscillation");
    opt("--profile", run.flags.profile, "desk or paper");
    opt("--d", run.flags.d, "Chain dimension");
    opt("--nf", run.flags.nf, "Frequency cutoff N_f");
    opt("--trials", run.flags.trials, "Number of trials N");
    opt("--lambda", run.flags.lambda, "Perturbation strength");
    opt("--dt", run.flags.dt, "Time step");
    opt("--tmax", run.flags.tmax, "Horizon");
    opt("--seed", run.flags.seed, "Base seed");
    opt("--nstar", run.flags.nstar, "Transition index n*");
    sru->add_option("--config", run.config, "JSON config file");
    sru->add_option("--replay", run.replay, "Re-run the config stored in a manifest.json");
    sru->add_option("--out", run.out, "Output directory")->capture_default_str();
    sru->add_flag("--serial", run.serial, "Use the single-threaded reference runner");

    std::string plot_dir;
    auto* spl = app.add_subcommand("plot", "Re-render the SVG figures of a run directory");
    spl->add_option("--in", plot_dir, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*sd) return cmd_design(design);
        if (*sp) return cmd_propagate(prop);
        if (*sr) return cmd_reverse(rev);
        if (*spt) return cmd_perturb(pert);
        if (*sf) return cmd_fit(fa);
        if (*sru) return cmd_run(run);
        if (*spl) return cmd_plot(plot_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_config;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    }
    return 0;
}
