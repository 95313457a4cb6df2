#include "self/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "self/rng.hpp"

namespace self {

bool MlpParams::shape_congruent(const MlpParams& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (!layers[l].weight.same_shape(other.layers[l].weight)) return false;
        if (layers[l].bias.size() != other.layers[l].bias.size()) return false;
    }
    return true;
}

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.weight.values.size() + layer.bias.size();
    return n;
}

MlpParams mlp_init(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw ShapeError("mlp_init: need at least input and output dims");
    Rng rng(derive_seed(seed, 0x6d6c7069));  // "mlpi"
    MlpParams params;
    params.layers.resize(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        auto& layer = params.layers[l];
        layer.weight = Tensor2(dims[l], dims[l + 1]);
        layer.bias.assign(dims[l + 1], 0.0);
        const double limit = std::sqrt(6.0 / static_cast<double>(dims[l]));
        for (double& w : layer.weight.values) w = rng.uniform(-limit, limit);
    }
    return params;
}

Gradients zeros_like(const MlpParams& params) {
    Gradients grads;
    grads.layers.resize(params.layers.size());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        grads.layers[l].weight = Tensor2(params.layers[l].weight.rows, params.layers[l].weight.cols);
        grads.layers[l].bias.assign(params.layers[l].bias.size(), 0.0);
    }
    return grads;
}

namespace {

// out = x (N x in) times W (in x out) + b, written as a k-inner loop so the
// compiler can vectorize the contiguous row updates.
void dense_forward(const Tensor2& x, const DenseLayer& layer, Tensor2& out) {
    const std::size_t n = x.rows, in = layer.in_dim(), outd = layer.out_dim();
    out = Tensor2(n, outd);
    for (std::size_t r = 0; r < n; ++r) {
        double* o = out.values.data() + r * outd;
        for (std::size_t j = 0; j < outd; ++j) o[j] = layer.bias[j];
        const double* xi = x.values.data() + r * in;
        for (std::size_t k = 0; k < in; ++k) {
            const double xv = xi[k];
            if (xv == 0.0) continue;
            const double* wk = layer.weight.values.data() + k * outd;
            for (std::size_t j = 0; j < outd; ++j) o[j] += xv * wk[j];
        }
    }
}

void relu_inplace(Tensor2& t) {
    for (double& v : t.values) v = std::max(0.0, v);
}

}  // namespace

Tensor2 mlp_forward(const MlpParams& params, const Tensor2& batch) {
    require_shape(!params.layers.empty(), "mlp_forward: empty network");
    require_shape(batch.cols == params.input_dim(), "mlp_forward: batch cols != input dim");
    Tensor2 cur = batch;
    Tensor2 next;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        dense_forward(cur, params.layers[l], next);
        if (l + 1 < params.layers.size()) relu_inplace(next);
        cur = std::move(next);
    }
    return cur;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> probs(logits.size());
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - m);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

Tensor2 softmax_rows(const Tensor2& logits) {
    Tensor2 probs(logits.rows, logits.cols);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const auto p = softmax(logits.row(r));
        std::copy(p.begin(), p.end(), probs.row(r).begin());
    }
    return probs;
}

Gradients mlp_backward(const MlpParams& params, const Tensor2& batch,
                       const Tensor2& upstream_logit_grads) {
    require_shape(batch.cols == params.input_dim(), "mlp_backward: batch cols != input dim");
    require_shape(upstream_logit_grads.rows == batch.rows &&
                      upstream_logit_grads.cols == params.output_dim(),
                  "mlp_backward: upstream grads shape mismatch");

    const std::size_t depth = params.layers.size();
    const std::size_t n = batch.rows;

    // Forward pass keeping post-activation outputs of every layer.
    std::vector<Tensor2> acts(depth);  // acts[l] = output of layer l (ReLU applied on hidden)
    {
        const Tensor2* cur = &batch;
        for (std::size_t l = 0; l < depth; ++l) {
            dense_forward(*cur, params.layers[l], acts[l]);
            if (l + 1 < depth) relu_inplace(acts[l]);
            cur = &acts[l];
        }
    }

    Gradients grads = zeros_like(params);
    Tensor2 delta = upstream_logit_grads;  // dLoss/d(pre-activation of layer l)

    for (std::size_t li = depth; li-- > 0;) {
        const Tensor2& input = (li == 0) ? batch : acts[li - 1];
        const DenseLayer& layer = params.layers[li];
        auto& glayer = grads.layers[li];
        const std::size_t in = layer.in_dim(), outd = layer.out_dim();

        // Weight grad: input^T * delta, bias grad: column sums of delta.
        for (std::size_t r = 0; r < n; ++r) {
            const double* xi = input.values.data() + r * in;
            const double* dr = delta.values.data() + r * outd;
            for (std::size_t j = 0; j < outd; ++j) glayer.bias[j] += dr[j];
            for (std::size_t k = 0; k < in; ++k) {
                const double xv = xi[k];
                if (xv == 0.0) continue;
                double* gw = glayer.weight.values.data() + k * outd;
                for (std::size_t j = 0; j < outd; ++j) gw[j] += xv * dr[j];
            }
        }

        if (li == 0) break;

        // Propagate: delta_prev = (delta * W^T) masked by ReLU derivative.
        Tensor2 prev(n, in);
        for (std::size_t r = 0; r < n; ++r) {
            const double* dr = delta.values.data() + r * outd;
            double* pr = prev.values.data() + r * in;
            for (std::size_t k = 0; k < in; ++k) {
                const double* wk = layer.weight.values.data() + k * outd;
                double acc = 0.0;
                for (std::size_t j = 0; j < outd; ++j) acc += dr[j] * wk[j];
                pr[k] = acc;
            }
            const double* ar = acts[li - 1].values.data() + r * in;
            for (std::size_t k = 0; k < in; ++k) {
                if (ar[k] <= 0.0) pr[k] = 0.0;
            }
        }
        delta = std::move(prev);
    }
    return grads;
}

void save_mlp(const MlpParams& params, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw LoadError("cannot write model snapshot: " + path);
    const std::uint64_t layers = params.layers.size();
    f.write(reinterpret_cast<const char*>(&layers), sizeof(layers));
    for (const auto& layer : params.layers) {
        const std::uint64_t in = layer.in_dim(), out = layer.out_dim();
        f.write(reinterpret_cast<const char*>(&in), sizeof(in));
        f.write(reinterpret_cast<const char*>(&out), sizeof(out));
        f.write(reinterpret_cast<const char*>(layer.weight.values.data()),
                static_cast<std::streamsize>(layer.weight.values.size() * sizeof(double)));
        f.write(reinterpret_cast<const char*>(layer.bias.data()),
                static_cast<std::streamsize>(layer.bias.size() * sizeof(double)));
    }
    if (!f) throw LoadError("short write to model snapshot: " + path);
}

MlpParams load_mlp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw LoadError("cannot open model snapshot: " + path);
    std::uint64_t layers = 0;
    f.read(reinterpret_cast<char*>(&layers), sizeof(layers));
    MlpParams params;
    params.layers.resize(layers);
    for (auto& layer : params.layers) {
        std::uint64_t in = 0, out = 0;
        f.read(reinterpret_cast<char*>(&in), sizeof(in));
        f.read(reinterpret_cast<char*>(&out), sizeof(out));
        if (!f) throw LoadError("truncated model snapshot: " + path);
        layer.weight = Tensor2(in, out);
        layer.bias.assign(out, 0.0);
        f.read(reinterpret_cast<char*>(layer.weight.values.data()),
               static_cast<std::streamsize>(layer.weight.values.size() * sizeof(double)));
        f.read(reinterpret_cast<char*>(layer.bias.data()),
               static_cast<std::streamsize>(layer.bias.size() * sizeof(double)));
    }
    if (!f) throw LoadError("truncated model snapshot: " + path);
    return params;
}

}  // namespace self
