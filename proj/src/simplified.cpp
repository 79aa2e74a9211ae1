#include "dpcore/simplified.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "dpcore/rng.hpp"

namespace dpcore {

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double norm(const std::vector<double>& a) {
    double acc = 0.0;
    for (double x : a) acc += x * x;
    return std::sqrt(acc);
}

bool close_rel(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size()) return false;
    std::vector<double> diff(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
    const double scale = std::max({norm(a), norm(b), 1e-30});
    return norm(diff) <= tol * scale;
}

// Partition of original batch ids induced by a run over a permuted order.
std::set<std::set<int>> partition_of(const std::vector<int>& order,
                                     const std::vector<int>& assignments) {
    std::map<int, std::set<int>> clusters;
    for (std::size_t pos = 0; pos < assignments.size(); ++pos)
        clusters[assignments[pos]].insert(order[pos]);
    std::set<std::set<int>> partition;
    for (auto& [label, members] : clusters) partition.insert(std::move(members));
    return partition;
}

}  // namespace

ScratchFn negate_mean_scratch() {
    return [](const std::vector<double>& mean) {
        std::vector<double> p(mean.size());
        for (std::size_t k = 0; k < mean.size(); ++k) p[k] = -mean[k];
        return p;
    };
}

int simplified_step(ClusterState& state, const std::vector<double>& batch_mean,
                    const SimplifiedConfig& config, const ScratchFn& scratch_fn) {
    config.validate();

    int nearest = -1;
    double best = 0.0;
    for (std::size_t j = 0; j < state.size(); ++j) {
        const double d = euclidean(batch_mean, state.core_means[j]);
        if (nearest < 0 || d < best) {
            best = d;
            nearest = static_cast<int>(j);
        }
    }

    if (nearest < 0 || best > config.theta) {
        state.core_means.push_back(batch_mean);
        state.core_prompts.push_back(scratch_fn(batch_mean));
        state.member_counts.push_back(1);
        const int idx = static_cast<int>(state.size()) - 1;
        state.assignments.push_back(idx);
        return idx;
    }

    const auto j = static_cast<std::size_t>(nearest);
    state.member_counts[j] += 1;
    const double alpha = config.alpha_mode == AlphaMode::Harmonic
                             ? 1.0 / static_cast<double>(state.member_counts[j])
                             : config.fixed_alpha;
    for (std::size_t k = 0; k < batch_mean.size(); ++k)
        state.core_means[j][k] =
            (1.0 - alpha) * state.core_means[j][k] + alpha * batch_mean[k];

    if (state.prompt_refine_step > 0.0) {
        const auto target = scratch_fn(batch_mean);
        for (std::size_t k = 0; k < target.size(); ++k)
            state.core_prompts[j][k] +=
                state.prompt_refine_step * (target[k] - state.core_prompts[j][k]);
    }
    state.assignments.push_back(nearest);
    return nearest;
}

ClusterState run_simplified(const std::vector<std::vector<double>>& batch_means,
                            const SimplifiedConfig& config, const ScratchFn& scratch_fn,
                            double prompt_refine_step) {
    ClusterState state;
    state.prompt_refine_step = prompt_refine_step;
    for (const auto& mean : batch_means) simplified_step(state, mean, config, scratch_fn);
    return state;
}

void recompute_prompts(ClusterState& state, const ScratchFn& scratch_fn) {
    for (std::size_t j = 0; j < state.size(); ++j)
        state.core_prompts[j] = scratch_fn(state.core_means[j]);
}

void check_separation(const std::vector<std::vector<double>>& batch_means,
                      const std::vector<int>& ground_truth, double theta) {
    if (batch_means.size() != ground_truth.size())
        throw std::invalid_argument("check_separation: label count mismatch");

    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < ground_truth.size(); ++i)
        groups[ground_truth[i]].push_back(i);

    std::map<int, double> diam;
    for (const auto& [label, members] : groups) {
        double d = 0.0;
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                d = std::max(d, euclidean(batch_means[members[a]], batch_means[members[b]]));
        diam[label] = d;
        if (d >= theta)
            throw separation_error("cluster diameter >= theta");
    }

    for (auto it = groups.begin(); it != groups.end(); ++it)
        for (auto jt = std::next(it); jt != groups.end(); ++jt) {
            double min_pair = std::numeric_limits<double>::infinity();
            for (std::size_t a : it->second)
                for (std::size_t b : jt->second)
                    min_pair = std::min(min_pair, euclidean(batch_means[a], batch_means[b]));
            if (min_pair - diam[it->first] - diam[jt->first] <= theta)
                throw separation_error("cluster gap certificate <= theta");
        }
}

bool check_prop1(const std::vector<int>& ground_truth,
                 const std::vector<std::vector<double>>& batch_means,
                 const SimplifiedConfig& config) {
    check_separation(batch_means, ground_truth, config.theta);
    const auto state = run_simplified(batch_means, config, negate_mean_scratch());

    std::vector<int> identity(batch_means.size());
    std::iota(identity.begin(), identity.end(), 0);
    return partition_of(identity, state.assignments) ==
           partition_of(identity, ground_truth);
}

OrderInvarianceReport check_prop2_order_invariance(
    const std::vector<std::vector<double>>& batch_means, const SimplifiedConfig& config,
    int exhaustive_limit, int sampled, uint64_t seed, double mean_rel_tol) {
    OrderInvarianceReport report;
    const std::size_t n = batch_means.size();
    if (n <= 1) {
        report.permutations_checked = 1;
        return report;
    }

    const auto scratch = negate_mean_scratch();

    std::vector<int> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    auto reference = run_simplified(batch_means, config, scratch);
    recompute_prompts(reference, scratch);
    const auto ref_partition = partition_of(identity, reference.assignments);

    // Cluster stats of the reference run, keyed by member set.
    std::map<std::set<int>, std::vector<double>> ref_means, ref_prompts;
    {
        std::map<int, std::set<int>> by_label;
        for (std::size_t pos = 0; pos < reference.assignments.size(); ++pos)
            by_label[reference.assignments[pos]].insert(identity[pos]);
        for (const auto& [label, members] : by_label) {
            ref_means[members] = reference.core_means[static_cast<std::size_t>(label)];
            ref_prompts[members] = reference.core_prompts[static_cast<std::size_t>(label)];
        }
    }

    auto check_order = [&](const std::vector<int>& order) {
        std::vector<std::vector<double>> permuted;
        permuted.reserve(n);
        for (int idx : order) permuted.push_back(batch_means[static_cast<std::size_t>(idx)]);
        auto state = run_simplified(permuted, config, scratch);
        recompute_prompts(state, scratch);
        report.permutations_checked += 1;

        if (partition_of(order, state.assignments) != ref_partition) {
            report.assignments_invariant = false;
            return;
        }
        std::map<int, std::set<int>> by_label;
        for (std::size_t pos = 0; pos < state.assignments.size(); ++pos)
            by_label[state.assignments[pos]].insert(order[pos]);
        for (const auto& [label, members] : by_label) {
            const auto j = static_cast<std::size_t>(label);
            if (config.alpha_mode == AlphaMode::Harmonic &&
                !close_rel(state.core_means[j], ref_means[members], mean_rel_tol))
                report.means_invariant = false;
            if (!close_rel(state.core_prompts[j], ref_prompts[members], mean_rel_tol))
                report.prompts_invariant = false;
        }
    };

    if (static_cast<int>(n) <= exhaustive_limit) {
        std::vector<int> order = identity;
        do {
            check_order(order);
        } while (std::next_permutation(order.begin(), order.end()));
    } else {
        auto rng = make_rng(derive_seed(seed, 0x9E23));
        std::vector<int> order = identity;
        for (int s = 0; s < sampled; ++s) {
            std::shuffle(order.begin(), order.end(), rng);
            check_order(order);
        }
    }
    return report;
}

}  // namespace dpcore
