#include "dpcore/runner.hpp"

#include <cmath>
#include <stdexcept>

#include "dpcore/rng.hpp"

namespace dpcore {

PolicyKind policy_from_name(const std::string& name) {
    if (name == "source_only") return PolicyKind::SourceOnly;
    if (name == "single_prompt") return PolicyKind::SinglePrompt;
    if (name == "per_batch_scratch") return PolicyKind::PerBatchScratch;
    if (name == "dpcore") return PolicyKind::DPCore;
    if (name == "dpcore_fixed_k") return PolicyKind::DPCoreFixedK;
    if (name == "dpcore_b") return PolicyKind::DPCoreB;
    throw std::invalid_argument("unknown policy: " + name);
}

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::SourceOnly: return "source_only";
        case PolicyKind::SinglePrompt: return "single_prompt";
        case PolicyKind::PerBatchScratch: return "per_batch_scratch";
        case PolicyKind::DPCore: return "dpcore";
        case PolicyKind::DPCoreFixedK: return "dpcore_fixed_k";
        case PolicyKind::DPCoreB: return "dpcore_b";
    }
    throw std::invalid_argument("unknown policy kind");
}

namespace {

struct Accounting {
    long last_fp = 0;
    long last_bp = 0;

    // FP/BP charged since the previous batch.
    std::pair<long, long> take(const ComputeCounters& c) {
        const auto d = std::make_pair(c.fp - last_fp, c.bp - last_bp);
        last_fp = c.fp;
        last_bp = c.bp;
        return d;
    }
};

}  // namespace

RunReport run_policy(const RunInputs& in) {
    if (!in.model || !in.extractor || !in.source_stats || !in.classifier || !in.stream)
        throw std::invalid_argument("run_policy: missing inputs");
    if (in.stream->sequence.empty())
        throw std::invalid_argument("run_policy: empty stream");
    if (in.policy.kind == PolicyKind::DPCoreFixedK && in.coreset.max_size == 0)
        throw std::invalid_argument("run_policy: dpcore_fixed_k requires coreset.max_size");
    if (in.policy.kind == PolicyKind::DPCoreB && in.policy.buffer_size < 1)
        throw std::invalid_argument("run_policy: dpcore_b requires buffer_size >= 1");
    in.coreset.validate();

    AdaptState state;
    state.coreset.config = in.coreset;
    state.source_stats = *in.source_stats;
    state.extractor = *in.extractor;
    state.optim = in.optim;
    state.prompt_length = in.policy.prompt_length;
    state.run_seed = in.run_seed;
    state.force_refine_after_first = in.policy.force_refine_after_first;

    SampleBuffer buffer;
    buffer.capacity = static_cast<std::size_t>(in.policy.buffer_size);

    // SinglePrompt keeps one stored prompt outside any coreset.
    std::optional<Prompt> stored;

    Accounting acct;
    RunReport report;
    report.batches.reserve(in.stream->size());

    std::map<int, double> domain_error_sum;
    std::map<int, long> domain_batch_count;

    for (std::size_t i = 0; i < in.stream->size(); ++i) {
        const auto entry = in.stream->sequence[i];
        const auto batch = sample_domain_batch(
            *in.model, entry.domain, in.batch_size,
            derive_seed(in.run_seed, static_cast<uint64_t>(entry.domain),
                        static_cast<uint64_t>(entry.batch_id)));

        BatchRecord rec;
        rec.index = static_cast<long>(i);
        rec.true_domain = entry.domain;

        FeatureBatch prediction;
        switch (in.policy.kind) {
            case PolicyKind::SourceOnly: {
                prediction = extract(*in.extractor, batch.input);
                rec.path = BatchPath::NoAdapt;
                const auto stats = compute_stats(prediction);
                rec.d_pre = stats_distance(*in.source_stats, stats);
                rec.d_post = rec.d_pre;
                break;
            }
            case PolicyKind::SinglePrompt: {
                if (!stored) {
                    auto learned = learn_prompt_from_scratch(state, batch.input);
                    stored = learned.prompt;
                    prediction = extract(*in.extractor, batch.input, *stored);
                    rec.path = BatchPath::Scratch;
                } else {
                    auto refined = refine_prompt(*in.extractor, batch.input,
                                                 *in.source_stats, in.optim, *stored,
                                                 in.optim.steps_refine);
                    state.counters.on_steps(in.optim.steps_refine);
                    for (std::size_t k = 0; k < stored->tokens.size(); ++k)
                        stored->tokens[k] += in.coreset.alpha *
                                             (refined.prompt.tokens[k] - stored->tokens[k]);
                    prediction = extract(*in.extractor, batch.input, refined.prompt);
                    rec.path = BatchPath::Refine;
                }
                rec.coreset_size = 1;
                break;
            }
            case PolicyKind::PerBatchScratch: {
                const auto fingerprint = compute_stats(extract(*in.extractor, batch.input));
                rec.d_pre = stats_distance(*in.source_stats, fingerprint);
                auto learned = learn_prompt_from_scratch(state, batch.input);
                add_element(state.coreset, learned.prompt, fingerprint,
                            static_cast<long>(i));
                prediction = extract(*in.extractor, batch.input, learned.prompt);
                rec.d_post =
                    stats_distance(*in.source_stats, compute_stats(prediction));
                rec.path = BatchPath::Scratch;
                break;
            }
            case PolicyKind::DPCore:
            case PolicyKind::DPCoreFixedK: {
                auto out = dpcore_step(state, batch.input);
                prediction = std::move(out.prediction);
                rec.path = out.decision.path;
                rec.ratio = out.decision.ratio;
                rec.d_pre = out.decision.d_pre;
                rec.d_post = out.decision.d_post;
                break;
            }
            case PolicyKind::DPCoreB: {
                prediction = Matrix(batch.input.rows(), in.extractor->feature_dim());
                rec.path = BatchPath::NoAdapt;
                for (std::size_t s = 0; s < batch.input.rows(); ++s) {
                    auto out = dpcore_b_step(state, buffer, batch.input.values.row(s));
                    for (std::size_t k = 0; k < prediction.cols(); ++k)
                        prediction(s, k) = out.sample_features(0, k);
                    if (out.decision) {
                        rec.path = out.decision->path;
                        rec.ratio = out.decision->ratio;
                        rec.d_pre = out.decision->d_pre;
                        rec.d_post = out.decision->d_post;
                    }
                }
                break;
            }
        }

        if (in.policy.kind != PolicyKind::SinglePrompt)
            rec.coreset_size = state.coreset.size();
        rec.error = in.classifier->error_rate(prediction, batch.labels);
        std::tie(rec.fp, rec.bp) = acct.take(state.counters);

        domain_error_sum[entry.domain] += rec.error;
        domain_batch_count[entry.domain] += 1;
        switch (rec.path) {
            case BatchPath::Scratch: report.scratch_count += 1; break;
            case BatchPath::Refine: report.refine_count += 1; break;
            case BatchPath::NoAdapt: report.noadapt_count += 1; break;
        }
        report.batches.push_back(std::move(rec));
    }

    double error_sum = 0.0;
    for (const auto& rec : report.batches) error_sum += rec.error;
    const auto n = static_cast<double>(report.batches.size());
    report.overall_error = error_sum / n;
    for (const auto& [domain, sum] : domain_error_sum)
        report.per_domain_error[domain] = sum / static_cast<double>(domain_batch_count[domain]);
    report.final_coreset_size = in.policy.kind == PolicyKind::SinglePrompt
                                    ? (stored ? 1 : 0)
                                    : state.coreset.size();
    report.total_fp = state.counters.fp;
    report.total_bp = state.counters.bp;
    report.mean_fp = static_cast<double>(report.total_fp) / n;
    report.mean_bp = static_cast<double>(report.total_bp) / n;
    report.final_coreset = std::move(state.coreset);
    return report;
}

std::vector<std::pair<long, std::size_t>> coreset_size_trace(const RunReport& report) {
    std::vector<std::pair<long, std::size_t>> trace;
    trace.reserve(report.batches.size());
    for (const auto& rec : report.batches) trace.emplace_back(rec.index, rec.coreset_size);
    return trace;
}

}  // namespace dpcore
