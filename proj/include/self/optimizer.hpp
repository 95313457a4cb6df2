#pragma once

#include <cstddef>

#include "self/mlp.hpp"

namespace self {

// SGD with Nesterov momentum, decoupled L2 weight decay on weights only,
// and single-cycle cosine annealing over total_steps.
struct OptimizerState {
    Gradients velocity;
    double base_lr = 0.05;
    double weight_decay = 2e-4;
    std::size_t step = 0;
    std::size_t total_steps = 1;
};

OptimizerState make_optimizer(const MlpParams& params, double base_lr, double weight_decay,
                              std::size_t total_steps);

// base_lr * 0.5 * (1 + cos(pi * step / total_steps)).
double cosine_lr(const OptimizerState& state);

// v <- mu*v - lr*g_eff; p <- p + mu*v - lr*g_eff with g_eff = g + wd*w on
// weight matrices (biases take raw g). Advances state.step.
void sgd_nesterov_step(MlpParams& params, const Gradients& grads, OptimizerState& state,
                       double momentum);

}  // namespace self
