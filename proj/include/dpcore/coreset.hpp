#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dpcore/extractor.hpp"
#include "dpcore/stats.hpp"

namespace dpcore {

enum class OverflowPolicy { DiscardOldest, MergeSimilar };

struct CoresetConfig {
    double tau = 1.0;    // weight temperature
    double rho = 0.8;    // refine-vs-new ratio threshold, (0, 1]
    double alpha = 0.999;  // element update weight, (0, 1]
    std::size_t max_size = 0;  // 0 = unbounded
    OverflowPolicy overflow_policy = OverflowPolicy::DiscardOldest;

    void validate() const;
};

// One (prompt, fingerprint) pair. The stats are always computed from
// prompt-free features.
struct CoreElement {
    Prompt prompt;
    DomainStats stats;
    long created_at = 0;
    long refine_count = 0;
};

struct PromptCoreset {
    std::vector<CoreElement> elements;  // insertion order preserved
    CoresetConfig config;

    std::size_t size() const { return elements.size(); }
    bool empty() const { return elements.empty(); }
};

// Distance-softmax convex combination of the stored prompts against a probe
// fingerprint. Throws on an empty coreset (callers take the scratch path).
std::pair<Prompt, std::vector<double>> weighted_prompt(const PromptCoreset& coreset,
                                                       const DomainStats& probe);

enum class GateDecision { Refine, NewDomain };

struct GateResult {
    GateDecision decision;
    double ratio;  // d(source, probe_weighted) / d(source, probe_noprompt)
};

// ratio <= rho keeps the batch on the refine path; a zero pre-prompt
// distance means the batch is already source-aligned and also refines.
GateResult ratio_gate(const DomainStats& source, const DomainStats& probe_noprompt,
                      const DomainStats& probe_weighted, double rho);

// p_j += alpha w_j (p_t - p_j); mu_j += alpha w_j (mu_t - mu_j);
// sigma_j += alpha w_j max(0, sigma_t - sigma_j) componentwise.
void refine_elements(PromptCoreset& coreset, const Prompt& p_t, const DomainStats& stats_t,
                     const std::vector<double>& weights, double alpha);

// Appends, then applies the overflow policy if max_size is exceeded.
void add_element(PromptCoreset& coreset, Prompt prompt, DomainStats stats,
                 long created_at);

// Snapshot for post-hoc analysis (documented structure, nlohmann dump).
std::string coreset_to_json(const PromptCoreset& coreset, int indent = -1);

}  // namespace dpcore
