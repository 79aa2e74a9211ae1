#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpcore/adapt.hpp"
#include "dpcore/streams.hpp"
#include "dpcore/testbed.hpp"

namespace dpcore {

enum class PolicyKind {
    SourceOnly,       // frozen model, no adaptation
    SinglePrompt,     // one prompt updated every batch, no coreset gating
    PerBatchScratch,  // fresh prompt per batch
    DPCore,
    DPCoreFixedK,     // DPCore with a bounded coreset
    DPCoreB,          // buffered per-sample variant
};

PolicyKind policy_from_name(const std::string& name);
std::string policy_name(PolicyKind kind);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::DPCore;
    std::size_t prompt_length = 8;
    int buffer_size = 64;                   // DPCoreB
    bool force_refine_after_first = false;  // test hook, not in the file schema
};

struct RunInputs {
    const DomainModel* model = nullptr;
    const ExtractorSpec* extractor = nullptr;
    const DomainStats* source_stats = nullptr;
    const CentroidClassifier* classifier = nullptr;
    const DomainStream* stream = nullptr;
    CoresetConfig coreset;
    OptimConfig optim;
    PolicyConfig policy;
    int batch_size = 64;
    uint64_t run_seed = 0;
};

struct BatchRecord {
    long index = 0;
    int true_domain = 0;
    BatchPath path = BatchPath::NoAdapt;
    std::optional<double> ratio;
    std::optional<double> d_pre;
    std::optional<double> d_post;
    double error = 0.0;
    std::size_t coreset_size = 0;
    long fp = 0;  // increment charged to this batch
    long bp = 0;
};

struct RunReport {
    std::vector<BatchRecord> batches;
    std::map<int, double> per_domain_error;
    double overall_error = 0.0;
    std::size_t final_coreset_size = 0;
    long total_fp = 0;
    long total_bp = 0;
    double mean_fp = 0.0;
    double mean_bp = 0.0;
    long scratch_count = 0;
    long refine_count = 0;
    long noadapt_count = 0;
    PromptCoreset final_coreset;
};

// Materializes each stream entry into a labeled batch (seeded by
// (run_seed, domain, batch_id), so all policies see identical data),
// runs the policy, and evaluates every prediction.
RunReport run_policy(const RunInputs& in);

// (batch index, coreset size) pairs from a finished run.
std::vector<std::pair<long, std::size_t>> coreset_size_trace(const RunReport& report);

}  // namespace dpcore
