#include "self/batch.hpp"

#include "self/errors.hpp"
#include "self/rng.hpp"

namespace self {

namespace {

// Endless pass over a pool, reshuffling whenever it is exhausted.
class CyclingSampler {
public:
    CyclingSampler(std::vector<std::size_t> pool, Rng& rng) : pool_(std::move(pool)), rng_(rng) {
        rng_.shuffle(pool_);
    }

    std::size_t next() {
        if (pos_ == pool_.size()) {
            rng_.shuffle(pool_);
            pos_ = 0;
        }
        return pool_[pos_++];
    }

private:
    std::vector<std::size_t> pool_;
    Rng& rng_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<Batch> compose_batch(const std::vector<std::size_t>& active,
                                 const std::vector<std::size_t>& unsupervised_stream,
                                 const BatchPlan& plan, std::uint64_t seed, std::size_t epoch) {
    if (plan.labeled_per_batch + plan.unlabeled_per_batch != plan.total)
        throw ConfigError("batch plan: labeled + unlabeled must equal total");
    if (plan.total == 0) throw ConfigError("batch plan: total must be > 0");

    Rng rng(derive_seed(seed, 0x62617463, epoch));  // "batc"
    const bool degenerate = active.empty();

    std::vector<Batch> batches;
    if (plan.unlabeled_per_batch == 0) {
        // Pure supervised mode: one epoch is a pass over the Active set.
        if (degenerate) return batches;
        std::vector<std::size_t> order = active;
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += plan.labeled_per_batch) {
            Batch b;
            const std::size_t end = std::min(start + plan.labeled_per_batch, order.size());
            b.sample_ids.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                                order.begin() + static_cast<std::ptrdiff_t>(end));
            b.labeled_count = b.sample_ids.size();
            batches.push_back(std::move(b));
        }
        return batches;
    }

    std::vector<std::size_t> stream = unsupervised_stream;
    rng.shuffle(stream);
    CyclingSampler labeled(active, rng);

    for (std::size_t start = 0; start < stream.size(); start += plan.unlabeled_per_batch) {
        Batch b;
        b.degenerate_supervised = degenerate;
        if (!degenerate) {
            for (std::size_t i = 0; i < plan.labeled_per_batch; ++i)
                b.sample_ids.push_back(labeled.next());
        }
        b.labeled_count = b.sample_ids.size();
        const std::size_t end = std::min(start + plan.unlabeled_per_batch, stream.size());
        for (std::size_t i = start; i < end; ++i) b.sample_ids.push_back(stream[i]);
        batches.push_back(std::move(b));
    }
    return batches;
}

}  // namespace self
