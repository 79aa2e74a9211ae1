#include "dpcore/prompt_learn.hpp"

namespace dpcore {

AlignmentGrad eval_loss_and_grad(const ExtractorSpec& spec, const InputBatch& batch,
                                 const Prompt& prompt, const DomainStats& source,
                                 const OptimConfig& optim) {
    if (optim.grad_mode == GradMode::Analytic)
        return alignment_loss_and_grad(spec, batch, prompt, source);
    AlignmentGrad out;
    out.loss = alignment_loss(spec, batch, prompt, source);
    out.grad = finite_diff_grad(spec, batch, prompt, source, optim.fd_step);
    return out;
}

LearnResult refine_prompt(const ExtractorSpec& spec, const InputBatch& batch,
                          const DomainStats& source, const OptimConfig& optim,
                          const Prompt& start, int steps) {
    LearnResult out;
    out.prompt = start;
    out.loss_trace.reserve(static_cast<std::size_t>(steps));
    AdamWState adam(out.prompt.tokens.size());
    for (int s = 0; s < steps; ++s) {
        auto eval = eval_loss_and_grad(spec, batch, out.prompt, source, optim);
        out.loss_trace.push_back(eval.loss);
        adamw_step(out.prompt.tokens, eval.grad, adam, optim);
    }
    return out;
}

LearnResult learn_prompt(const ExtractorSpec& spec, const InputBatch& batch,
                         const DomainStats& source, const OptimConfig& optim,
                         std::size_t prompt_length, int steps, uint64_t init_seed) {
    // Scratch learning keeps the best-loss iterate of the trajectory. The
    // objective is a nonsmooth distance, where a constant-step adaptive
    // method ends on an oscillation around the optimum; the best evaluated
    // iterate converges even when the last one does not.
    LearnResult out;
    out.prompt = Prompt::gaussian(prompt_length, spec.token_dim(), init_seed);
    out.loss_trace.reserve(static_cast<std::size_t>(steps));
    AdamWState adam(out.prompt.tokens.size());
    Prompt best = out.prompt;
    double best_loss = 0.0;
    for (int s = 0; s < steps; ++s) {
        auto eval = eval_loss_and_grad(spec, batch, out.prompt, source, optim);
        out.loss_trace.push_back(eval.loss);
        if (s == 0 || eval.loss < best_loss) {
            best_loss = eval.loss;
            best = out.prompt;
        }
        adamw_step(out.prompt.tokens, eval.grad, adam, optim);
    }
    out.prompt = std::move(best);
    return out;
}

}  // namespace dpcore
