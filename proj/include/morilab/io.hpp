#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "morilab/chain.hpp"
#include "morilab/design.hpp"
#include "morilab/experiment.hpp"
#include "morilab/fit.hpp"
#include "morilab/perturbation.hpp"
#include "morilab/reverse.hpp"

namespace morilab::io {

using nlohmann::ordered_json;

/// 17 significant digits, so text round-trips bit-exactly.
std::string format_double(double x);

/// Writes `content` to `path`, creating parent directories; throws ConfigError("out") on failure.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Parses a CSV with a header row into string cells; blank lines are skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};
CsvTable parse_csv(const std::string& text);
double parse_double(const std::string& cell);

std::string chain_csv(const LanczosChain& chain);
LanczosChain chain_from_csv(const std::string& text, std::string label = {});
ordered_json chain_json(const LanczosChain& chain);
LanczosChain chain_from_json(const ordered_json& j);

std::string series_csv(const CorrelationSeries& series);
CorrelationSeries series_from_csv(const std::string& text);

/// `n,b,achieved_flag`: flag 1 for reverse-engineered entries, 0 for continued ones.
std::string reverse_csv(const std::vector<double>& b, std::size_t achieved);
ordered_json reverse_sidecar(const SpectralDensityInput& spectrum, const ReverseResult& result,
                             const QuadratureOptions& quadrature);

ordered_json draw_json(const PerturbationDraw& draw);
PerturbationDraw draw_from_json(const ordered_json& j);

ordered_json fit_json(const FitResult& result);
ordered_json model_json(const FitModel& model);

std::string records_csv(const std::vector<TrialRecord>& records);
std::string histogram_csv(const EnsembleSummary& summary);
std::string scatter_csv(const EnsembleSummary& summary);
ordered_json summary_json(const ScenarioOutcome& outcome);

}  // namespace morilab::io
