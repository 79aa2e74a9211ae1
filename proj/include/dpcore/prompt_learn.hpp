#pragma once

#include <cstdint>
#include <vector>

#include "dpcore/extractor.hpp"
#include "dpcore/optimizer.hpp"

namespace dpcore {

struct LearnResult {
    Prompt prompt;
    std::vector<double> loss_trace;  // loss at each step, before the update
};

// Evaluate the alignment objective with the configured gradient mode.
AlignmentGrad eval_loss_and_grad(const ExtractorSpec& spec, const InputBatch& batch,
                                 const Prompt& prompt, const DomainStats& source,
                                 const OptimConfig& optim);

// Gaussian-init prompt optimized for `steps` iterations on one batch.
// Pure given (spec, batch, source, optim, init_seed); counters are the
// caller's business.
LearnResult learn_prompt(const ExtractorSpec& spec, const InputBatch& batch,
                         const DomainStats& source, const OptimConfig& optim,
                         std::size_t prompt_length, int steps, uint64_t init_seed);

// Same optimization loop, but starting from an existing prompt.
LearnResult refine_prompt(const ExtractorSpec& spec, const InputBatch& batch,
                          const DomainStats& source, const OptimConfig& optim,
                          const Prompt& start, int steps);

}  // namespace dpcore
