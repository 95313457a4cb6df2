#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "self/tensor.hpp"

namespace self {

// One fully connected layer. weight is (in_dim x out_dim) so that a batch
// row maps as x * W + b.
struct DenseLayer {
    Tensor2 weight;
    std::vector<double> bias;

    std::size_t in_dim() const { return weight.rows; }
    std::size_t out_dim() const { return weight.cols; }
};

// Student (or teacher) network: dense layers with ReLU on all hidden layers
// and raw logits at the output.
struct MlpParams {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.front().in_dim(); }
    std::size_t output_dim() const { return layers.back().out_dim(); }
    bool shape_congruent(const MlpParams& other) const;
    std::size_t parameter_count() const;
};

// Same layout as MlpParams, holding per-parameter gradients.
struct Gradients {
    std::vector<DenseLayer> layers;
};

// dims = {input, hidden..., classes}. He-style fan-in uniform weights,
// zero biases, deterministic under seed.
MlpParams mlp_init(const std::vector<std::size_t>& dims, std::uint64_t seed);

Gradients zeros_like(const MlpParams& params);

// batch is (N x input_dim); returns logits (N x output_dim).
Tensor2 mlp_forward(const MlpParams& params, const Tensor2& batch);

// Overflow-safe softmax of one logit row.
std::vector<double> softmax(std::span<const double> logits);

// Row-wise softmax of a logits matrix.
Tensor2 softmax_rows(const Tensor2& logits);

// Exact analytic gradients of whatever loss produced upstream_logit_grads
// (dLoss/dlogits, same shape as the forward output).
Gradients mlp_backward(const MlpParams& params, const Tensor2& batch,
                       const Tensor2& upstream_logit_grads);

// Flat binary snapshot: u64 layer count, then per layer u64 in, u64 out,
// weight doubles, bias doubles.
void save_mlp(const MlpParams& params, const std::string& path);
MlpParams load_mlp(const std::string& path);

}  // namespace self
