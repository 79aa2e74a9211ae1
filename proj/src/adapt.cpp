#include "dpcore/adapt.hpp"

#include <stdexcept>

#include "dpcore/rng.hpp"

namespace dpcore {

ComputeCounters replay_decisions(const std::vector<ScriptedDecision>& script,
                                 const OptimConfig& optim) {
    ComputeCounters c;
    for (const auto& d : script) {
        if (d.evaluated) c.on_evaluation();
        switch (d.path) {
            case BatchPath::Scratch: c.on_steps(optim.steps_scratch); break;
            case BatchPath::Refine: c.on_steps(optim.steps_refine); break;
            case BatchPath::NoAdapt: break;
        }
    }
    return c;
}

LearnResult learn_prompt_from_scratch(AdaptState& state, const InputBatch& batch) {
    const uint64_t init_seed =
        derive_seed(state.run_seed, 0x11A7, static_cast<uint64_t>(state.scratch_events));
    state.scratch_events += 1;
    auto result = learn_prompt(state.extractor, batch, state.source_stats, state.optim,
                               state.prompt_length, state.optim.steps_scratch, init_seed);
    state.counters.on_steps(state.optim.steps_scratch);
    return result;
}

StepOutput dpcore_step(AdaptState& state, const InputBatch& batch) {
    state.coreset.config.validate();
    const long t = state.batch_index++;
    const DomainStats fingerprint = compute_stats(extract(state.extractor, batch));

    StepOutput out;
    out.decision.d_pre = stats_distance(state.source_stats, fingerprint);

    if (state.coreset.empty()) {
        auto learned = learn_prompt_from_scratch(state, batch);
        add_element(state.coreset, learned.prompt, fingerprint, t);
        out.prediction = extract(state.extractor, batch, learned.prompt);
        out.decision.path = BatchPath::Scratch;
        out.decision.prompt_used = std::move(learned.prompt);
        out.decision.d_post =
            stats_distance(state.source_stats, compute_stats(out.prediction));
        return out;
    }

    state.counters.on_evaluation();
    auto [p_w, weights] = weighted_prompt(state.coreset, fingerprint);
    const DomainStats probe_stats = compute_stats(extract(state.extractor, batch, p_w));
    out.decision.d_post = stats_distance(state.source_stats, probe_stats);
    auto gate = ratio_gate(state.source_stats, fingerprint, probe_stats,
                           state.coreset.config.rho);
    if (state.force_refine_after_first) gate.decision = GateDecision::Refine;
    out.decision.ratio = gate.ratio;
    out.decision.weights = weights;

    if (gate.decision == GateDecision::Refine) {
        auto refined = refine_prompt(state.extractor, batch, state.source_stats,
                                     state.optim, p_w, state.optim.steps_refine);
        state.counters.on_steps(state.optim.steps_refine);
        refine_elements(state.coreset, refined.prompt, fingerprint, weights,
                        state.coreset.config.alpha);
        out.prediction = extract(state.extractor, batch, refined.prompt);
        out.decision.path = BatchPath::Refine;
        out.decision.prompt_used = std::move(refined.prompt);
    } else {
        auto learned = learn_prompt_from_scratch(state, batch);
        add_element(state.coreset, learned.prompt, fingerprint, t);
        out.prediction = extract(state.extractor, batch, learned.prompt);
        out.decision.path = BatchPath::Scratch;
        out.decision.prompt_used = std::move(learned.prompt);
    }
    return out;
}

BufferedStepOutput dpcore_b_step(AdaptState& state, SampleBuffer& buffer,
                                 std::span<const double> sample) {
    if (buffer.capacity < 1)
        throw std::invalid_argument("dpcore_b_step: buffer capacity must be >= 1");
    if (sample.size() != state.extractor.input_dim())
        throw std::invalid_argument("dpcore_b_step: sample dim mismatch");

    buffer.pending.emplace_back(sample.begin(), sample.end());

    BufferedStepOutput out;
    if (buffer.pending.size() >= buffer.capacity) {
        InputBatch assembled;
        assembled.values = Matrix(buffer.pending.size(), state.extractor.input_dim());
        for (std::size_t i = 0; i < buffer.pending.size(); ++i)
            for (std::size_t k = 0; k < state.extractor.input_dim(); ++k)
                assembled.values(i, k) = buffer.pending[i][k];
        buffer.pending.clear();

        auto step = dpcore_step(state, assembled);
        buffer.current_prompt = step.decision.prompt_used;
        out.decision = std::move(step.decision);
    }

    InputBatch one;
    one.values = Matrix(1, state.extractor.input_dim());
    for (std::size_t k = 0; k < sample.size(); ++k) one.values(0, k) = sample[k];
    out.sample_features =
        buffer.current_prompt ? extract(state.extractor, one, *buffer.current_prompt)
                              : extract(state.extractor, one);
    return out;
}

}  // namespace dpcore
