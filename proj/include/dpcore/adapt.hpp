#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpcore/coreset.hpp"
#include "dpcore/extractor.hpp"
#include "dpcore/optimizer.hpp"
#include "dpcore/prompt_learn.hpp"

namespace dpcore {

enum class BatchPath { Scratch, Refine, NoAdapt };

// Billable adaptation work. Every optimizer step costs one forward and one
// backward pass; a batch that is evaluated against a non-empty coreset costs
// two extra forward passes (prompt-free fingerprint + weighted-prompt probe).
// Prediction passes with the final prompt are outputs, not adaptation cost.
struct ComputeCounters {
    long fp = 0;
    long bp = 0;

    void on_evaluation() { fp += 2; }
    void on_steps(int steps) {
        fp += steps;
        bp += steps;
    }
};

struct ScriptedDecision {
    BatchPath path = BatchPath::Refine;
    bool evaluated = true;
};

// Pure counter arithmetic over a decision script.
ComputeCounters replay_decisions(const std::vector<ScriptedDecision>& script,
                                 const OptimConfig& optim);

struct BatchDecision {
    BatchPath path = BatchPath::NoAdapt;
    std::optional<double> ratio;       // absent when the gate never ran
    std::vector<double> weights;       // empty when no weighting happened
    std::optional<Prompt> prompt_used; // final prompt for this batch
    double d_pre = 0.0;   // d(source, prompt-free batch stats)
    double d_post = 0.0;  // d(source, stats with the probe prompt)
};

struct AdaptState {
    PromptCoreset coreset;
    DomainStats source_stats;
    ExtractorSpec extractor;
    OptimConfig optim;
    std::size_t prompt_length = 8;
    ComputeCounters counters;
    long batch_index = 0;    // batches consumed so far
    long scratch_events = 0; // reseeds the Gaussian init deterministically
    uint64_t run_seed = 0;
    bool force_refine_after_first = false;  // gating disabled (test hook)
};

struct StepOutput {
    FeatureBatch prediction;
    BatchDecision decision;
};

// Scratch path: Gaussian init reseeded from (run_seed, scratch_events),
// optimized steps_scratch iterations; bills one FP+BP per step.
LearnResult learn_prompt_from_scratch(AdaptState& state, const InputBatch& batch);

// One full per-batch update: fingerprint, weighted-prompt probe, ratio gate,
// then either a single-step refinement of the weighted prompt plus a weighted
// update of every element, or scratch learning plus a new element.
StepOutput dpcore_step(AdaptState& state, const InputBatch& batch);

// Buffered variant for tiny batches: samples accumulate until `capacity` is
// reached, then one dpcore_step runs on the assembled batch. Each sample is
// predicted with the prompt available at its arrival (post-flush for the
// sample that completes the buffer, so capacity 1 matches dpcore_step).
struct SampleBuffer {
    std::size_t capacity = 64;
    std::vector<std::vector<double>> pending;
    std::optional<Prompt> current_prompt;
};

struct BufferedStepOutput {
    FeatureBatch sample_features;  // 1 x d_f
    std::optional<BatchDecision> decision;
};

BufferedStepOutput dpcore_b_step(AdaptState& state, SampleBuffer& buffer,
                                 std::span<const double> sample);

}  // namespace dpcore
