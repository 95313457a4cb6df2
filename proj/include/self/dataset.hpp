#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "self/tensor.hpp"

namespace self {

enum class LabelStatus { Active, Removed };

// Per-sample label bookkeeping. original_label is frozen at noise-injection
// time; filtering only ever toggles status. true_label is hidden ground
// truth, used for evaluation metrics only.
struct LabelRecord {
    std::size_t sample_id = 0;
    int original_label = 0;
    int true_label = 0;
    LabelStatus status = LabelStatus::Active;
};

struct Dataset {
    Tensor2 features;  // N x d
    std::vector<LabelRecord> labels;
    int class_count = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t active_count() const;
    std::vector<std::size_t> active_indices() const;
    std::vector<std::size_t> all_indices() const;
};

enum class NoiseKind { None, Symmetric, PairFlip, NextClass };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::None;
    double ratio = 0.0;
    std::vector<std::pair<int, int>> pair_map;  // PairFlip only: source -> target
    std::uint64_t seed = 0;
    bool exact_count = true;  // round(p*N) flips instead of i.i.d. Bernoulli
};

// CIFAR-10 semantic pair flips with canonical class indices
// (airplane=0, automobile=1, bird=2, cat=3, deer=4, dog=5, frog=6,
//  horse=7, ship=8, truck=9): truck->automobile, bird->airplane,
// deer->horse, cat<->dog.
std::vector<std::pair<int, int>> cifar10_pair_map();

// Uniform label noise: exactly round(p*N) samples get a label drawn uniformly
// from the K-1 other classes (exact_count mode), or each sample flips
// independently with probability p.
std::vector<LabelRecord> inject_symmetric(const std::vector<int>& labels, double p, int class_count,
                                          std::uint64_t seed, bool exact_count = true);

// Pair-flip or next-class noise; flips happen only along the configured map,
// exact-count per source class (or i.i.d. when spec.exact_count is false).
std::vector<LabelRecord> inject_asymmetric(const std::vector<int>& labels, const NoiseSpec& spec,
                                           std::uint64_t seed);

// Applies spec to ds.labels in place (features untouched, true labels kept).
void apply_noise(Dataset& ds, const NoiseSpec& spec, std::uint64_t seed);

// K Gaussian clusters, per-dimension standardized, cluster means placed with
// pairwise distance comfortably above 4*spread so the clean problem is
// near-perfectly separable. Deterministic under seed.
Dataset make_blobs(int class_count, std::size_t per_class, std::size_t dim, double spread,
                   std::uint64_t seed);

// IDX (big-endian magic + dims) image/label pair. Pixels scaled to [0,1],
// images flattened to rows*cols features.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// CSV with header f0..f{d-1},label.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

}  // namespace self
