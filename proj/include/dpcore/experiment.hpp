#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpcore/config.hpp"
#include "dpcore/report.hpp"

namespace dpcore {

// Frozen per-config context shared by all run seeds: model, extractor,
// reference statistics and the fitted classifier.
struct ExperimentContext {
    DomainModel model;
    ExtractorSpec extractor;
    SourceData source;
    CentroidClassifier classifier;
};

ExperimentContext build_context(const ExperimentConfig& cfg);

struct SeedRunResult {
    uint64_t seed = 0;
    RunReport report;
    nlohmann::json summary;
    std::string trace_csv;
    std::string stream_csv;
};

// One fully deterministic run of the configured policy for one seed.
SeedRunResult run_experiment_seed(const ExperimentConfig& cfg,
                                  const ExperimentContext& ctx, uint64_t seed);

// Worker count for sweeps: DPCORE_WORKERS when set, OpenMP default otherwise.
int worker_count();

// Exit codes: 0 success, 1 config error, 2 property failure.
int cmd_run(const std::string& config_path, std::optional<uint64_t> seed_override,
            const std::string& out_dir);
int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              const std::string& out_dir);
int cmd_props();
int cmd_streams_gen(const std::string& spec_path, const std::string& out_csv);

}  // namespace dpcore
