#include "self/losses.hpp"

#include <cmath>

#include "self/errors.hpp"
#include "self/mlp.hpp"

namespace self {

namespace {

double safe_log(double x) { return std::log(std::max(x, 1e-300)); }

}  // namespace

double supervised_nll(const Tensor2& probs, const std::vector<int>& active_labels,
                      LossCounters* counters) {
    require_shape(probs.rows == active_labels.size(), "supervised_nll: rows != labels");
    if (active_labels.empty()) {
        if (counters) ++counters->degenerate_supervised;
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t r = 0; r < probs.rows; ++r) {
        double p = probs.at(r, static_cast<std::size_t>(active_labels[r]));
        if (p < kProbClamp) {
            p = kProbClamp;
            if (counters) ++counters->nll_clamps;
        }
        sum -= std::log(p);
    }
    return sum / static_cast<double>(probs.rows);
}

double consistency_loss(const Tensor2& student_probs, const Tensor2& teacher_probs,
                        ConsistencyKind kind) {
    require_shape(student_probs.same_shape(teacher_probs),
                  "consistency_loss: student/teacher shapes differ");
    if (student_probs.rows == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < student_probs.values.size(); ++i) {
        const double s = student_probs.values[i];
        const double t = teacher_probs.values[i];
        if (kind == ConsistencyKind::MSE) {
            sum += (s - t) * (s - t);
        } else if (t > 0.0) {
            sum += t * (safe_log(t) - safe_log(s));
        }
    }
    return sum / static_cast<double>(student_probs.rows);
}

double rampup_weight(std::size_t epoch, std::size_t rampup_epochs, double target) {
    if (rampup_epochs == 0 || epoch >= rampup_epochs) return target;
    const double x = static_cast<double>(epoch) / static_cast<double>(rampup_epochs);
    return target * std::exp(-5.0 * (1.0 - x) * (1.0 - x));
}

double entropy_min_loss(const Tensor2& probs) {
    if (probs.rows == 0) return 0.0;
    double sum = 0.0;
    for (double p : probs.values) {
        if (p > 0.0) sum -= p * std::log(p);
    }
    return sum / static_cast<double>(probs.rows);
}

double mean_entropy_max_loss(const Tensor2& probs) {
    require_shape(probs.rows >= 1, "mean_entropy_max_loss: need at least one row");
    std::vector<double> mean(probs.cols, 0.0);
    for (std::size_t r = 0; r < probs.rows; ++r) {
        for (std::size_t k = 0; k < probs.cols; ++k) mean[k] += probs.at(r, k);
    }
    double neg_entropy = 0.0;
    for (double& m : mean) {
        m /= static_cast<double>(probs.rows);
        if (m > 0.0) neg_entropy += m * std::log(m);
    }
    return neg_entropy;
}

double push_away_loss(const Tensor2& probs, const std::vector<int>& labels, double c,
                      int class_count, LossCounters* counters) {
    require_shape(probs.rows == labels.size(), "push_away_loss: rows != labels");
    if (c <= 0.0) throw ConfigError("push_away_loss: c must be > 0");
    if (class_count < 2) throw ConfigError("push_away_loss: need at least 2 classes");
    if (labels.empty()) return 0.0;
    const double scale = c / static_cast<double>(class_count - 1);
    double sum = 0.0;
    for (std::size_t r = 0; r < probs.rows; ++r) {
        for (std::size_t k = 0; k < probs.cols; ++k) {
            if (static_cast<int>(k) == labels[r]) continue;
            double p = probs.at(r, k);
            if (p < kProbClamp) {
                p = kProbClamp;
                if (counters) ++counters->nll_clamps;
            }
            sum -= scale * std::log(p);
        }
    }
    return sum / static_cast<double>(probs.rows);
}

LossBreakdown total_loss(const LossConfig& cfg, const LossParts& parts, std::size_t epoch) {
    const auto need = [](const std::optional<double>& part, const char* name) {
        if (!part) throw ConfigError(std::string("total_loss: enabled term missing: ") + name);
        return *part;
    };

    LossBreakdown out;
    out.supervised = need(parts.supervised, "supervised");
    out.total = out.supervised;
    if (cfg.consistency_enabled) {
        out.consistency = need(parts.consistency, "consistency");
        out.total += rampup_weight(epoch, cfg.rampup_epochs, cfg.consistency_weight) *
                     out.consistency;
    }
    if (cfg.logit_distance_enabled) {
        out.logit_distance = need(parts.logit_distance, "logit_distance");
        out.total += cfg.logit_distance_weight * out.logit_distance;
    }
    if (cfg.entropy_min_enabled) {
        out.entropy_min = need(parts.entropy_min, "entropy_min");
        out.total += cfg.entropy_min_weight * out.entropy_min;
    }
    if (cfg.mean_entropy_max_enabled) {
        out.mean_entropy_max = need(parts.mean_entropy_max, "mean_entropy_max");
        out.total += cfg.mean_entropy_max_weight * out.mean_entropy_max;
    }
    if (cfg.push_away_enabled) {
        // c is already folded into the term value.
        out.push_away = need(parts.push_away, "push_away");
        out.total += out.push_away;
    }
    return out;
}

namespace {

// Rows selected by a mask, gathered into a dense matrix plus their labels.
struct Gathered {
    Tensor2 probs;
    std::vector<int> labels;
    std::vector<std::size_t> rows;
};

Gathered gather(const Tensor2& probs, const std::vector<int>& labels,
                const std::vector<std::uint8_t>& mask) {
    Gathered g;
    for (std::size_t r = 0; r < probs.rows; ++r) {
        if (mask[r]) g.rows.push_back(r);
    }
    g.probs = Tensor2(g.rows.size(), probs.cols);
    g.labels.resize(g.rows.size());
    for (std::size_t i = 0; i < g.rows.size(); ++i) {
        const auto src = probs.row(g.rows[i]);
        std::copy(src.begin(), src.end(), g.probs.row(i).begin());
        g.labels[i] = labels[g.rows[i]];
    }
    return g;
}

}  // namespace

BatchLossResult batch_loss_and_grad(const LossConfig& cfg, const Tensor2& student_logits,
                                    const Tensor2& teacher_logits, const std::vector<int>& labels,
                                    const std::vector<std::uint8_t>& supervised_mask,
                                    const std::vector<std::uint8_t>& removed_mask,
                                    std::size_t epoch, int class_count) {
    const std::size_t n = student_logits.rows;
    const std::size_t k = student_logits.cols;
    require_shape(student_logits.same_shape(teacher_logits),
                  "batch_loss_and_grad: student/teacher logit shapes differ");
    require_shape(labels.size() == n && supervised_mask.size() == n && removed_mask.size() == n,
                  "batch_loss_and_grad: mask/label sizes != batch rows");

    BatchLossResult out;
    out.logit_grad = Tensor2(n, k);
    const Tensor2 probs = softmax_rows(student_logits);
    const Tensor2 teacher_probs = softmax_rows(teacher_logits);

    // Gradients of prob-space terms are accumulated here (already weighted),
    // then pushed through the softmax Jacobian once per row at the end.
    Tensor2 prob_grad(n, k);
    LossParts parts;

    // Supervised NLL over the labeled slots.
    {
        const Gathered sup = gather(probs, labels, supervised_mask);
        parts.supervised = supervised_nll(sup.probs, sup.labels, &out.counters);
        if (!sup.rows.empty()) {
            const double inv = 1.0 / static_cast<double>(sup.rows.size());
            for (std::size_t i = 0; i < sup.rows.size(); ++i) {
                const auto y = static_cast<std::size_t>(sup.labels[i]);
                const double p = sup.probs.at(i, y);
                if (p >= kProbClamp) prob_grad.at(sup.rows[i], y) -= inv / p;
            }
        }
    }

    if (cfg.consistency_enabled) {
        parts.consistency = consistency_loss(probs, teacher_probs, cfg.consistency_kind);
        const double w = rampup_weight(epoch, cfg.rampup_epochs, cfg.consistency_weight);
        if (n > 0) {
            const double inv = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < probs.values.size(); ++i) {
                const double s = probs.values[i];
                const double t = teacher_probs.values[i];
                if (cfg.consistency_kind == ConsistencyKind::MSE) {
                    prob_grad.values[i] += w * 2.0 * (s - t) * inv;
                } else if (t > 0.0) {
                    prob_grad.values[i] -= w * t / std::max(s, 1e-300) * inv;
                }
            }
        }
    }

    if (cfg.logit_distance_enabled) {
        double sum = 0.0;
        const double inv = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
        for (std::size_t i = 0; i < student_logits.values.size(); ++i) {
            const double d = student_logits.values[i] - teacher_logits.values[i];
            sum += d * d;
            out.logit_grad.values[i] += cfg.logit_distance_weight * 2.0 * d * inv;
        }
        parts.logit_distance = sum * inv;
    }

    const std::vector<std::uint8_t>* entropy_mask = nullptr;
    std::vector<std::uint8_t> all_mask;
    if (cfg.entropy_min_enabled || cfg.mean_entropy_max_enabled) {
        if (cfg.entropy_scope == EntropyScope::All) {
            all_mask.assign(n, 1);
            entropy_mask = &all_mask;
        } else {
            entropy_mask = &removed_mask;
        }
    }

    if (cfg.entropy_min_enabled) {
        const Gathered ent = gather(probs, labels, *entropy_mask);
        parts.entropy_min = entropy_min_loss(ent.probs);
        if (!ent.rows.empty()) {
            const double scale = cfg.entropy_min_weight / static_cast<double>(ent.rows.size());
            for (std::size_t i = 0; i < ent.rows.size(); ++i) {
                for (std::size_t c = 0; c < k; ++c) {
                    prob_grad.at(ent.rows[i], c) -= scale * (safe_log(ent.probs.at(i, c)) + 1.0);
                }
            }
        }
    }

    if (cfg.mean_entropy_max_enabled) {
        const Gathered ent = gather(probs, labels, *entropy_mask);
        if (!ent.rows.empty()) {
            parts.mean_entropy_max = mean_entropy_max_loss(ent.probs);
            std::vector<double> mean(k, 0.0);
            for (std::size_t i = 0; i < ent.rows.size(); ++i) {
                for (std::size_t c = 0; c < k; ++c) mean[c] += ent.probs.at(i, c);
            }
            const double inv = 1.0 / static_cast<double>(ent.rows.size());
            for (double& m : mean) m *= inv;
            for (std::size_t i = 0; i < ent.rows.size(); ++i) {
                for (std::size_t c = 0; c < k; ++c) {
                    prob_grad.at(ent.rows[i], c) +=
                        cfg.mean_entropy_max_weight * (safe_log(mean[c]) + 1.0) * inv;
                }
            }
        } else {
            parts.mean_entropy_max = 0.0;
        }
    }

    if (cfg.push_away_enabled) {
        const Gathered rem = gather(probs, labels, removed_mask);
        parts.push_away =
            push_away_loss(rem.probs, rem.labels, cfg.push_away_weight, class_count, &out.counters);
        if (!rem.rows.empty()) {
            const double scale = cfg.push_away_weight / static_cast<double>(class_count - 1) /
                                 static_cast<double>(rem.rows.size());
            for (std::size_t i = 0; i < rem.rows.size(); ++i) {
                for (std::size_t c = 0; c < k; ++c) {
                    if (static_cast<int>(c) == rem.labels[i]) continue;
                    const double p = rem.probs.at(i, c);
                    if (p >= kProbClamp) prob_grad.at(rem.rows[i], c) -= scale / p;
                }
            }
        }
    }

    out.breakdown = total_loss(cfg, parts, epoch);

    // Softmax Jacobian-vector product: gz_j = p_j * (gp_j - sum_k gp_k p_k).
    for (std::size_t r = 0; r < n; ++r) {
        const auto p = probs.row(r);
        const auto gp = prob_grad.row(r);
        double dot = 0.0;
        for (std::size_t c = 0; c < k; ++c) dot += gp[c] * p[c];
        auto gz = out.logit_grad.row(r);
        for (std::size_t c = 0; c < k; ++c) gz[c] += p[c] * (gp[c] - dot);
    }
    return out;
}

}  // namespace self
