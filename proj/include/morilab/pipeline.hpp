#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "morilab/experiment.hpp"
#include "morilab/manifest.hpp"

namespace morilab {

struct RunArtifacts {
    std::vector<std::string> files;
    RunManifest manifest;
};

/// Writes records, summary, histogram, scatter, chain and exemplar CSVs, the SVG
/// figures and finally manifest.json into `dir`.
RunArtifacts write_run(const ScenarioOutcome& outcome, const std::filesystem::path& dir, double duration_seconds);

/// `family,trial,t,C,fit` rows for the exemplary trials of each family (replayed from their seeds).
std::string exemplars_csv(const ScenarioOutcome& outcome, std::size_t per_family = 3);

}  // namespace morilab
