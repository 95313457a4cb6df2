#pragma once

#include <cstdint>
#include <vector>

namespace self {

// total = labeled_per_batch + unlabeled_per_batch. unlabeled_per_batch = 0
// means pure supervised batches over the Active set.
struct BatchPlan {
    std::size_t total = 64;
    std::size_t labeled_per_batch = 16;
    std::size_t unlabeled_per_batch = 48;
};

// One mini-batch of sample indices: the first labeled_count entries are the
// supervised slots (drawn from the Active set), the rest is the unsupervised
// part (drawn from the full stream).
struct Batch {
    std::vector<std::size_t> sample_ids;
    std::size_t labeled_count = 0;
    bool degenerate_supervised = false;  // Active set was empty; supervised part skipped
};

// One epoch of batches: a full pass over the shuffled unsupervised stream,
// with labeled slots cycling through the Active set (reshuffled on wrap).
// Deterministic under (seed, epoch).
std::vector<Batch> compose_batch(const std::vector<std::size_t>& active,
                                 const std::vector<std::size_t>& unsupervised_stream,
                                 const BatchPlan& plan, std::uint64_t seed, std::size_t epoch);

}  // namespace self
