#include "morilab/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "morilab/error.hpp"

namespace morilab::io {

namespace fs = std::filesystem;

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

void write_text(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("out", fmt::format("cannot write '{}'", path.string()));
    out << content;
    if (!out.flush()) throw ConfigError("out", fmt::format("failed writing '{}'", path.string()));
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("in", fmt::format("cannot read '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw InvalidArgument(fmt::format("CSV lacks column '{}'", name));
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size()) {
                throw InvalidArgument(fmt::format("CSV row has {} cells, header has {}", cells.size(), t.header.size()));
            }
            t.rows.push_back(std::move(cells));
        }
    }
    if (first) throw InvalidArgument("CSV is empty");
    return t;
}

double parse_double(const std::string& cell) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) throw InvalidArgument(fmt::format("not a number: '{}'", cell));
    return v;
}

std::string chain_csv(const LanczosChain& chain) {
    std::string out = "n,b\n";
    const auto b = chain.coefficients();
    for (std::size_t i = 0; i < b.size(); ++i) out += fmt::format("{},{}\n", i + 1, format_double(b[i]));
    return out;
}

LanczosChain chain_from_csv(const std::string& text, std::string label) {
    const CsvTable t = parse_csv(text);
    const std::size_t cn = t.column("n"), cb = t.column("b");
    std::vector<double> b;
    b.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (parse_double(t.rows[i][cn]) != static_cast<double>(i + 1)) {
            throw InvalidArgument(fmt::format("chain CSV row {} is out of order", i + 1));
        }
        b.push_back(parse_double(t.rows[i][cb]));
    }
    return LanczosChain(std::move(b), std::move(label));
}

ordered_json chain_json(const LanczosChain& chain) {
    ordered_json j;
    j["label"] = chain.label();
    j["d"] = chain.dimension();
    j["b"] = std::vector<double>(chain.coefficients().begin(), chain.coefficients().end());
    return j;
}

LanczosChain chain_from_json(const ordered_json& j) {
    auto b = j.at("b").get<std::vector<double>>();
    if (j.contains("d") && j.at("d").get<std::size_t>() != b.size() + 1) {
        throw InvalidArgument("chain JSON: d disagrees with the coefficient count");
    }
    return LanczosChain(std::move(b), j.value("label", std::string{}));
}

std::string series_csv(const CorrelationSeries& series) {
    std::string out = "t,C\n";
    for (std::size_t n = 0; n < series.size(); ++n) {
        out += fmt::format("{},{}\n", format_double(series.time(n)), format_double(series.values[n]));
    }
    return out;
}

CorrelationSeries series_from_csv(const std::string& text) {
    const CsvTable t = parse_csv(text);
    const std::size_t ct = t.column("t"), cc = t.column("C");
    if (t.rows.size() < 2) throw InvalidArgument("series CSV needs at least two samples");
    CorrelationSeries s;
    s.dt = parse_double(t.rows[1][ct]) - parse_double(t.rows[0][ct]);
    if (!(s.dt > 0.0)) throw InvalidArgument("series CSV: times must increase");
    for (std::size_t n = 0; n < t.rows.size(); ++n) {
        const double time = parse_double(t.rows[n][ct]);
        if (std::abs(time - static_cast<double>(n) * s.dt) > 1e-6 * std::max(1.0, time)) {
            throw InvalidArgument(fmt::format("series CSV: row {} is off the uniform grid", n));
        }
        s.values.push_back(parse_double(t.rows[n][cc]));
    }
    s.normalized = std::abs(s.values.front() - 1.0) < 1e-12;
    return s;
}

std::string reverse_csv(const std::vector<double>& b, std::size_t achieved) {
    std::string out = "n,b,achieved_flag\n";
    for (std::size_t i = 0; i < b.size(); ++i) {
        out += fmt::format("{},{},{}\n", i + 1, format_double(b[i]), i < achieved ? 1 : 0);
    }
    return out;
}

ordered_json reverse_sidecar(const SpectralDensityInput& spectrum, const ReverseResult& result,
                             const QuadratureOptions& quadrature) {
    ordered_json j;
    j["source"] = spectrum.source == SpectrumSource::Analytic ? "analytic" : "sampled";
    j["decaying"] = spectrum.decaying;
    j["grid_points"] = spectrum.omega.size();
    j["grid_step"] = spectrum.step;
    j["half_width"] = spectrum.half_width();
    j["points_per_unit"] = quadrature.points_per_unit;
    j["tail_floor"] = quadrature.tail_floor;
    j["max_half_width"] = quadrature.max_half_width;
    j["achieved"] = result.achieved;
    switch (result.reason) {
        case LanczosStop::Requested: j["stop_reason"] = "requested"; break;
        case LanczosStop::SmallCoefficient: j["stop_reason"] = "small_coefficient"; break;
        case LanczosStop::LostOrthogonality: j["stop_reason"] = "lost_orthogonality"; break;
    }
    j["max_diagonal"] = result.max_diagonal;
    j["max_overlap"] = result.max_overlap;
    j["normalization_drift"] = result.normalization_drift;
    j["warnings"] = spectrum.warnings;
    return j;
}

ordered_json draw_json(const PerturbationDraw& draw) {
    ordered_json j;
    j["seed"] = draw.seed;
    j["d"] = draw.d;
    j["n_f"] = draw.n_f;
    j["x"] = draw.x;
    j["y"] = draw.y;
    return j;
}

PerturbationDraw draw_from_json(const ordered_json& j) {
    auto x = j.at("x").get<std::vector<double>>();
    auto y = j.at("y").get<std::vector<double>>();
    if (j.contains("n_f") && j.at("n_f").get<std::size_t>() != x.size()) {
        throw InvalidArgument("draw JSON: n_f disagrees with the amplitude count");
    }
    return replay_noise(j.at("d").get<std::size_t>(), j.at("seed").get<std::uint64_t>(), std::move(x), std::move(y));
}

ordered_json model_json(const FitModel& m) {
    ordered_json j;
    j["model"] = std::string(model_name(m.cls));
    j["A"] = m.A;
    j["mu"] = m.mu;
    if (is_oscillatory(m.cls)) {
        j["omega"] = m.omega;
        j["phi"] = m.phi;
    }
    return j;
}

ordered_json fit_json(const FitResult& r) {
    ordered_json j = model_json(r.model);
    j["epsilon"] = r.epsilon;
    j["n_eq"] = r.n_eq;
    j["converged"] = r.converged;
    j["restarts_used"] = r.restarts_used;
    return j;
}

std::string records_csv(const std::vector<TrialRecord>& records) {
    std::string out = "trial,seed,model,A,mu,omega,phi,epsilon,sigma,n_eq,converged\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.trial, r.seed, model_name(r.model.cls),
                           format_double(r.model.A), format_double(r.model.mu), format_double(r.model.omega),
                           format_double(r.model.phi), format_double(r.epsilon), format_double(r.sigma), r.n_eq,
                           r.converged ? 1 : 0);
    }
    return out;
}

std::string histogram_csv(const EnsembleSummary& summary) {
    std::string out = "bin_left,bin_right,family,count\n";
    for (const auto& f : summary.families) {
        for (std::size_t k = 0; k < f.histogram.counts.size(); ++k) {
            out += fmt::format("{},{},{},{}\n", format_double(f.histogram.left(k)),
                               format_double(f.histogram.right(k)), f.label, f.histogram.counts[k]);
        }
    }
    return out;
}

std::string scatter_csv(const EnsembleSummary& summary) {
    std::string out = "family,sigma,epsilon\n";
    for (const auto& f : summary.families) {
        for (const auto& [s, e] : f.scatter) out += fmt::format("{},{},{}\n", f.label, format_double(s), format_double(e));
    }
    return out;
}

ordered_json summary_json(const ScenarioOutcome& outcome) {
    const auto& cfg = outcome.setup.config;
    ordered_json j;
    j["scenario"] = std::string(scenario_name(cfg.scenario));
    j["profile"] = std::string(profile_name(cfg.profile));
    j["trials"] = cfg.trials;
    j["bin_width"] = cfg.bin_width;
    j["invalid_trials"] = outcome.summary.invalid_trials;
    j["omitted_families"] = outcome.summary.omitted;
    ordered_json fams = ordered_json::array();
    for (const auto& f : outcome.summary.families) {
        ordered_json fj;
        fj["label"] = f.label;
        fj["model"] = std::string(model_name(f.model));
        fj["valid"] = f.valid;
        fj["invalid"] = f.invalid;
        fj["non_equilibrated"] = f.non_equilibrated;
        fj["mean_epsilon"] = f.mean_epsilon;
        fj["stderr_epsilon"] = f.stderr_epsilon;
        fj["mean_sigma"] = f.mean_sigma;
        fj["stderr_sigma"] = f.stderr_sigma;
        for (const auto& fam : outcome.setup.families) {
            if (fam.label != f.label) continue;
            fj["unperturbed_fit"] = fit_json(fam.unperturbed_fit);
            fj["sum_b_squared"] = spectral_width_sum(fam.chain);
        }
        fj["exemplary_trials"] = exemplary_trials(outcome.records, f);
        fams.push_back(std::move(fj));
    }
    j["families"] = std::move(fams);
    ordered_json failures = ordered_json::array();
    for (const auto& r : outcome.records) {
        if (r.valid) continue;
        failures.push_back({{"trial", r.trial}, {"family", r.family}, {"reason", r.failure}});
    }
    j["failures"] = std::move(failures);
    return j;
}

}  // namespace morilab::io
