#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "self/tensor.hpp"

namespace self {

enum class ConsistencyKind { MSE, KL };

// Which rows the entropy terms see: every sample in the batch, or only the
// ones whose label was filtered out.
enum class EntropyScope { All, Removed };

struct LossConfig {
    double consistency_weight = 100.0;
    ConsistencyKind consistency_kind = ConsistencyKind::MSE;
    double logit_distance_weight = 0.01;
    std::size_t rampup_epochs = 5;
    double entropy_min_weight = 0.1;
    double mean_entropy_max_weight = 0.1;
    double push_away_weight = 1.0;  // the scalar c inside push_away_loss
    EntropyScope entropy_scope = EntropyScope::All;

    bool consistency_enabled = true;
    bool logit_distance_enabled = true;
    bool entropy_min_enabled = false;
    bool mean_entropy_max_enabled = false;
    bool push_away_enabled = false;
};

// Per-term raw values (unweighted, except push_away which carries its c by
// definition) plus the weighted total.
struct LossBreakdown {
    double supervised = 0.0;
    double consistency = 0.0;
    double logit_distance = 0.0;
    double entropy_min = 0.0;
    double mean_entropy_max = 0.0;
    double push_away = 0.0;
    double total = 0.0;
};

struct LossCounters {
    std::size_t nll_clamps = 0;            // p[y] hit the 1e-12 floor
    std::size_t degenerate_supervised = 0;  // supervised term had no rows
};

inline constexpr double kProbClamp = 1e-12;

// Mean of -log p[y] over the given rows; probs rows must be distributions.
// Empty input yields 0 and bumps the degenerate counter.
double supervised_nll(const Tensor2& probs, const std::vector<int>& active_labels,
                      LossCounters* counters = nullptr);

// Mean over rows of sum_k (s-t)^2 (MSE) or sum_k t*log(t/s) (KL, teacher as
// target). The teacher side is a constant in all gradients.
double consistency_loss(const Tensor2& student_probs, const Tensor2& teacher_probs,
                        ConsistencyKind kind);

// target * exp(-5*(1 - min(epoch/rampup,1))^2); rampup_epochs = 0 means the
// target applies from the start.
double rampup_weight(std::size_t epoch, std::size_t rampup_epochs, double target);

// Mean row entropy; 0*log0 := 0.
double entropy_min_loss(const Tensor2& probs);

// Negated entropy of the mean prediction; adding it to the total maximizes
// the mean-prediction entropy.
double mean_entropy_max_loss(const Tensor2& probs);

// Mean over rows of (c/(K-1)) * sum_{y' != y} -log p[y'].
double push_away_loss(const Tensor2& probs, const std::vector<int>& labels, double c,
                      int class_count, LossCounters* counters = nullptr);

// Raw per-term values; enabled terms must be present or a ConfigError is
// thrown. Consistency is scaled by its ramped weight at the given epoch.
struct LossParts {
    std::optional<double> supervised;
    std::optional<double> consistency;
    std::optional<double> logit_distance;
    std::optional<double> entropy_min;
    std::optional<double> mean_entropy_max;
    std::optional<double> push_away;
};

LossBreakdown total_loss(const LossConfig& cfg, const LossParts& parts, std::size_t epoch);

// Full batch objective: values of every enabled term plus d(total)/d(student
// logits), with the teacher treated as constant. supervised_mask marks rows
// that carry an Active label in the supervised slot; removed_mask marks rows
// whose sample is currently filtered out.
struct BatchLossResult {
    LossBreakdown breakdown;
    Tensor2 logit_grad;
    LossCounters counters;
};

BatchLossResult batch_loss_and_grad(const LossConfig& cfg, const Tensor2& student_logits,
                                    const Tensor2& teacher_logits, const std::vector<int>& labels,
                                    const std::vector<std::uint8_t>& supervised_mask,
                                    const std::vector<std::uint8_t>& removed_mask,
                                    std::size_t epoch, int class_count);

}  // namespace self
