#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpcore/runner.hpp"
#include "dpcore/streams.hpp"
#include "dpcore/testbed.hpp"

namespace dpcore {

inline constexpr int kConfigSchemaVersion = 1;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The full experiment description. The stream's and run's RNG streams are
// derived from (per-run seed, config salt); the model and extractor are
// frozen by their own config seeds and shared across run seeds.
struct ExperimentConfig {
    TestbedConfig testbed;

    ExtractorKind extractor_kind = ExtractorKind::LinearAdditive;
    std::size_t d_feat = 16;
    std::size_t mlp_hidden = 32;
    uint64_t extractor_seed = 7;

    StreamSpec stream;  // num_domains / batches_per_domain resolved from testbed

    PolicyConfig policy;
    CoresetConfig coreset;
    OptimConfig optim;

    std::vector<uint64_t> seeds = {1};

    void validate() const;
};

// Strict parse: unknown keys anywhere are a config_error.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// Resolved echo used in summaries; parse(echo) == config.
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

// Standalone stream spec file for `streams gen` (carries its own
// num_domains / batches_per_domain).
StreamSpec parse_stream_spec(const nlohmann::json& j);

}  // namespace dpcore
