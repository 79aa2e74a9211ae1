#include "dpcore/coreset.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace dpcore {

void CoresetConfig::validate() const {
    if (tau <= 0.0) throw std::invalid_argument("CoresetConfig: tau must be > 0");
    if (rho <= 0.0 || rho > 1.0)
        throw std::invalid_argument("CoresetConfig: rho must be in (0, 1]");
    if (alpha <= 0.0 || alpha > 1.0)
        throw std::invalid_argument("CoresetConfig: alpha must be in (0, 1]");
}

std::pair<Prompt, std::vector<double>> weighted_prompt(const PromptCoreset& coreset,
                                                       const DomainStats& probe) {
    if (coreset.empty())
        throw std::invalid_argument("weighted_prompt: coreset is empty");

    std::vector<double> distances(coreset.size());
    for (std::size_t j = 0; j < coreset.size(); ++j)
        distances[j] = stats_distance(probe, coreset.elements[j].stats);
    const auto weights = softmax_weights(distances, coreset.config.tau);

    const auto& first = coreset.elements.front().prompt;
    Prompt mixed = Prompt::zeros(first.length, first.token_dim);
    for (std::size_t j = 0; j < coreset.size(); ++j) {
        const auto& p = coreset.elements[j].prompt;
        if (p.tokens.size() != mixed.tokens.size())
            throw std::invalid_argument("weighted_prompt: inconsistent prompt shapes");
        for (std::size_t k = 0; k < mixed.tokens.size(); ++k)
            mixed.tokens[k] += weights[j] * p.tokens[k];
    }
    return {std::move(mixed), weights};
}

GateResult ratio_gate(const DomainStats& source, const DomainStats& probe_noprompt,
                      const DomainStats& probe_weighted, double rho) {
    const double d_pre = stats_distance(source, probe_noprompt);
    if (d_pre == 0.0) return {GateDecision::Refine, 0.0};
    const double d_post = stats_distance(source, probe_weighted);
    const double ratio = d_post / d_pre;
    return {ratio <= rho ? GateDecision::Refine : GateDecision::NewDomain, ratio};
}

void refine_elements(PromptCoreset& coreset, const Prompt& p_t, const DomainStats& stats_t,
                     const std::vector<double>& weights, double alpha) {
    if (weights.size() != coreset.size())
        throw std::invalid_argument("refine_elements: weight count does not match coreset");

    for (std::size_t j = 0; j < coreset.size(); ++j) {
        auto& el = coreset.elements[j];
        const double step = alpha * weights[j];
        if (el.prompt.tokens.size() != p_t.tokens.size())
            throw std::invalid_argument("refine_elements: prompt shape mismatch");
        for (std::size_t k = 0; k < p_t.tokens.size(); ++k)
            el.prompt.tokens[k] += step * (p_t.tokens[k] - el.prompt.tokens[k]);
        for (std::size_t k = 0; k < el.stats.dim(); ++k) {
            el.stats.mean[k] += step * (stats_t.mean[k] - el.stats.mean[k]);
            // Clamped delta keeps stored stddevs valid (and nondecreasing).
            el.stats.stddev[k] +=
                step * std::max(0.0, stats_t.stddev[k] - el.stats.stddev[k]);
        }
        el.refine_count += 1;
    }
}

namespace {

void apply_overflow(PromptCoreset& coreset) {
    auto& els = coreset.elements;
    if (coreset.config.overflow_policy == OverflowPolicy::DiscardOldest) {
        auto oldest = std::min_element(
            els.begin(), els.end(),
            [](const CoreElement& a, const CoreElement& b) { return a.created_at < b.created_at; });
        els.erase(oldest);
        return;
    }

    // Merge the pair with the smallest fingerprint distance into an
    // elementwise average, kept at the earlier position.
    std::size_t best_i = 0, best_j = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < els.size(); ++i)
        for (std::size_t j = i + 1; j < els.size(); ++j) {
            const double d = stats_distance(els[i].stats, els[j].stats);
            if (d < best) {
                best = d;
                best_i = i;
                best_j = j;
            }
        }

    auto& keep = els[best_i];
    const auto& drop = els[best_j];
    for (std::size_t k = 0; k < keep.prompt.tokens.size(); ++k)
        keep.prompt.tokens[k] = 0.5 * (keep.prompt.tokens[k] + drop.prompt.tokens[k]);
    for (std::size_t k = 0; k < keep.stats.dim(); ++k) {
        keep.stats.mean[k] = 0.5 * (keep.stats.mean[k] + drop.stats.mean[k]);
        keep.stats.stddev[k] = 0.5 * (keep.stats.stddev[k] + drop.stats.stddev[k]);
    }
    keep.created_at = std::min(keep.created_at, drop.created_at);
    keep.refine_count += drop.refine_count;
    els.erase(els.begin() + static_cast<std::ptrdiff_t>(best_j));
}

}  // namespace

void add_element(PromptCoreset& coreset, Prompt prompt, DomainStats stats,
                 long created_at) {
    coreset.elements.push_back(
        {std::move(prompt), std::move(stats), created_at, 0});
    if (coreset.config.max_size > 0 && coreset.size() > coreset.config.max_size)
        apply_overflow(coreset);
}

std::string coreset_to_json(const PromptCoreset& coreset, int indent) {
    nlohmann::json j;
    j["size"] = coreset.size();
    j["config"] = {
        {"tau", coreset.config.tau},
        {"rho", coreset.config.rho},
        {"alpha", coreset.config.alpha},
        {"max_size", coreset.config.max_size},
        {"overflow_policy",
         coreset.config.overflow_policy == OverflowPolicy::DiscardOldest ? "discard_oldest"
                                                                         : "merge_similar"},
    };
    auto elements = nlohmann::json::array();
    for (const auto& el : coreset.elements) {
        elements.push_back({
            {"prompt", el.prompt.tokens},
            {"prompt_length", el.prompt.length},
            {"token_dim", el.prompt.token_dim},
            {"mean", el.stats.mean},
            {"std", el.stats.stddev},
            {"created_at", el.created_at},
            {"refine_count", el.refine_count},
        });
    }
    j["elements"] = std::move(elements);
    return j.dump(indent);
}

}  // namespace dpcore
