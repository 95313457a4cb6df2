#include "self/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "self/errors.hpp"

namespace self {

OptimizerState make_optimizer(const MlpParams& params, double base_lr, double weight_decay,
                              std::size_t total_steps) {
    if (base_lr <= 0.0) throw ConfigError("optimizer: base_lr must be > 0");
    if (weight_decay < 0.0) throw ConfigError("optimizer: weight_decay must be >= 0");
    if (total_steps == 0) throw ConfigError("optimizer: total_steps must be > 0");
    OptimizerState state;
    state.velocity = zeros_like(params);
    state.base_lr = base_lr;
    state.weight_decay = weight_decay;
    state.step = 0;
    state.total_steps = total_steps;
    return state;
}

double cosine_lr(const OptimizerState& state) {
    const double frac =
        static_cast<double>(state.step) / static_cast<double>(state.total_steps);
    return state.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

void sgd_nesterov_step(MlpParams& params, const Gradients& grads, OptimizerState& state,
                       double momentum) {
    if (momentum < 0.0 || momentum >= 1.0)
        throw ConfigError("optimizer: momentum must be in [0,1)");
    if (params.layers.size() != grads.layers.size() ||
        params.layers.size() != state.velocity.layers.size())
        throw ShapeError("sgd_nesterov_step: layer count mismatch");

    const double lr = cosine_lr(state);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& p = params.layers[l];
        const auto& g = grads.layers[l];
        auto& v = state.velocity.layers[l];
        require_shape(p.weight.same_shape(g.weight) && p.weight.same_shape(v.weight) &&
                          p.bias.size() == g.bias.size() && p.bias.size() == v.bias.size(),
                      "sgd_nesterov_step: layer shape mismatch");

        for (std::size_t i = 0; i < p.weight.values.size(); ++i) {
            const double geff = g.weight.values[i] + state.weight_decay * p.weight.values[i];
            v.weight.values[i] = momentum * v.weight.values[i] - lr * geff;
            p.weight.values[i] += momentum * v.weight.values[i] - lr * geff;
        }
        for (std::size_t i = 0; i < p.bias.size(); ++i) {
            const double geff = g.bias[i];
            v.bias[i] = momentum * v.bias[i] - lr * geff;
            p.bias[i] += momentum * v.bias[i] - lr * geff;
        }
    }
    if (state.step < state.total_steps) ++state.step;
}

}  // namespace self
