#include "morilab/pipeline.hpp"

#include <fmt/core.h>

#include "morilab/config.hpp"
#include "morilab/io.hpp"
#include "morilab/plots.hpp"

namespace morilab {

std::string exemplars_csv(const ScenarioOutcome& outcome, std::size_t per_family) {
    std::string out = "family,trial,t,C,fit\n";
    for (const auto& f : outcome.summary.families) {
        std::size_t index = 0;
        while (outcome.setup.families[index].label != f.label) ++index;
        for (std::size_t trial : exemplary_trials(outcome.records, f, per_family)) {
            CorrelationSeries series;
            const TrialRecord r = run_trial(outcome.setup, trial, index, &series);
            for (std::size_t n = 0; n < series.size(); ++n) {
                const double t = series.time(n);
                out += fmt::format("{},{},{},{},{}\n", f.label, trial, io::format_double(t),
                                   io::format_double(series.values[n]), io::format_double(r.model(t)));
            }
        }
    }
    return out;
}

RunArtifacts write_run(const ScenarioOutcome& outcome, const std::filesystem::path& dir, double duration_seconds) {
    RunArtifacts a;
    auto put = [&](const std::string& name, const std::string& content) {
        io::write_text(dir / name, content);
        a.files.push_back(name);
    };
    put("config.json", config_json(outcome.setup.config).dump(2) + "\n");
    put("records.csv", io::records_csv(outcome.records));
    put("summary.json", io::summary_json(outcome).dump(2) + "\n");
    put("histogram.csv", io::histogram_csv(outcome.summary));
    put("scatter.csv", io::scatter_csv(outcome.summary));
    for (const auto& fam : outcome.setup.families) {
        put("chain_" + fam.label + ".csv", io::chain_csv(fam.chain));
        put("unperturbed_" + fam.label + ".csv", io::series_csv(fam.unperturbed));
    }
    put("exemplars.csv", exemplars_csv(outcome));
    for (auto& svg : plots::render_run(dir)) a.files.push_back(std::move(svg));
    a.manifest = make_manifest(outcome.setup.config, duration_seconds, dir, a.files);
    io::write_text(dir / "manifest.json", manifest_json(a.manifest).dump(2) + "\n");
    return a;
}

}  // namespace morilab
