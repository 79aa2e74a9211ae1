#pragma once

#include <vector>

namespace dpcore {

enum class GradMode { Analytic, FiniteDiff };

struct OptimConfig {
    double lr = 0.01;
    int steps_scratch = 50;
    int steps_refine = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    GradMode grad_mode = GradMode::Analytic;
    double fd_step = 1e-4;
};

// First/second moment buffers plus the bias-correction step counter.
struct AdamWState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;

    explicit AdamWState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One decoupled-weight-decay adaptive-moment step, in place.
void adamw_step(std::vector<double>& params, const std::vector<double>& grad,
                AdamWState& state, const OptimConfig& cfg);

}  // namespace dpcore
