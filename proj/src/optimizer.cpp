#include "dpcore/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace dpcore {

void adamw_step(std::vector<double>& params, const std::vector<double>& grad,
                AdamWState& state, const OptimConfig& cfg) {
    if (grad.size() != params.size())
        throw std::invalid_argument("adamw_step: grad/param shape mismatch");
    if (state.m.size() != params.size()) state = AdamWState(params.size());

    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) +
                               cfg.weight_decay * params[i]);
    }
}

}  // namespace dpcore
