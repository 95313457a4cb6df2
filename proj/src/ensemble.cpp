#include "self/ensemble.hpp"

#include <algorithm>
#include <fstream>

#include "self/errors.hpp"

namespace self {

TeacherState make_teacher(const MlpParams& student, double decay) {
    if (decay < 0.0 || decay > 1.0) throw ConfigError("teacher decay must be in [0,1]");
    return TeacherState{student, decay, 0};
}

void teacher_ema_update(TeacherState& teacher, const MlpParams& student) {
    if (!teacher.params.shape_congruent(student))
        throw ShapeError("teacher_ema_update: teacher/student shapes differ");
    const double b = teacher.decay;
    for (std::size_t l = 0; l < student.layers.size(); ++l) {
        auto& tl = teacher.params.layers[l];
        const auto& sl = student.layers[l];
        for (std::size_t i = 0; i < tl.weight.values.size(); ++i)
            tl.weight.values[i] = b * tl.weight.values[i] + (1.0 - b) * sl.weight.values[i];
        for (std::size_t i = 0; i < tl.bias.size(); ++i)
            tl.bias[i] = b * tl.bias[i] + (1.0 - b) * sl.bias[i];
    }
    ++teacher.updates_applied;
}

PredictionEnsemble make_prediction_ensemble(std::size_t samples, std::size_t classes,
                                            double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("prediction ensemble alpha must be in [0,1]");
    PredictionEnsemble ens;
    ens.z_bar = Tensor2(samples, classes);
    ens.alpha = alpha;
    return ens;
}

void prediction_ema_update(PredictionEnsemble& ens, std::size_t sample_id,
                           std::span<const double> z_hat) {
    if (sample_id >= ens.z_bar.rows)
        throw ShapeError("prediction_ema_update: sample_id out of range");
    if (z_hat.size() != ens.z_bar.cols)
        throw ShapeError("prediction_ema_update: score vector length != class count");
    auto row = ens.z_bar.row(sample_id);
    for (std::size_t k = 0; k < row.size(); ++k) {
        row[k] = ens.alpha * row[k] + (1.0 - ens.alpha) * z_hat[k];
    }
    ++ens.updates_applied;
}

KeepDecision agreement_decision(std::span<const double> z_bar_row, int original_label,
                                const FilterStrategy& strategy) {
    const std::size_t k_classes = z_bar_row.size();
    const auto label = static_cast<std::size_t>(original_label);

    if (strategy.rule == FilterRule::ArgmaxAgreement) {
        std::size_t best = 0;
        bool tie = false;
        for (std::size_t c = 1; c < k_classes; ++c) {
            if (z_bar_row[c] > z_bar_row[best]) {
                best = c;
                tie = false;
            } else if (z_bar_row[c] == z_bar_row[best]) {
                tie = true;  // resolved in favor of the lower index already held
            }
        }
        return {best == label, tie};
    }

    // TopK: label kept iff fewer than k entries strictly beat it, counting
    // equal entries at lower class indices against it (lowest-index wins ties).
    const std::size_t k = std::min(strategy.k, k_classes);
    if (k == 0) throw ConfigError("TopK filter: k must be >= 1");
    const double label_score = z_bar_row[label];
    std::size_t rank = 0;
    bool tie = false;
    for (std::size_t c = 0; c < k_classes; ++c) {
        if (c == label) continue;
        if (z_bar_row[c] > label_score) {
            ++rank;
        } else if (z_bar_row[c] == label_score) {
            tie = true;
            if (c < label) ++rank;
        }
    }
    return {rank < k, tie};
}

bool agreement_keep(const PredictionEnsemble& ens, std::size_t sample_id, int original_label,
                    const FilterStrategy& strategy) {
    if (sample_id >= ens.z_bar.rows) throw ShapeError("agreement_keep: sample_id out of range");
    return agreement_decision(ens.z_bar.row(sample_id), original_label, strategy).keep;
}

void save_prediction_ensemble(const PredictionEnsemble& ens, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw LoadError("cannot write ensemble checkpoint: " + path);
    const std::uint64_t n = ens.z_bar.rows, k = ens.z_bar.cols, u = ens.updates_applied;
    f.write(reinterpret_cast<const char*>(&n), sizeof(n));
    f.write(reinterpret_cast<const char*>(&k), sizeof(k));
    f.write(reinterpret_cast<const char*>(&ens.alpha), sizeof(ens.alpha));
    f.write(reinterpret_cast<const char*>(&u), sizeof(u));
    f.write(reinterpret_cast<const char*>(ens.z_bar.values.data()),
            static_cast<std::streamsize>(ens.z_bar.values.size() * sizeof(double)));
    if (!f) throw LoadError("short write to ensemble checkpoint: " + path);
}

PredictionEnsemble load_prediction_ensemble(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw LoadError("cannot open ensemble checkpoint: " + path);
    std::uint64_t n = 0, k = 0, u = 0;
    double alpha = 0.0;
    f.read(reinterpret_cast<char*>(&n), sizeof(n));
    f.read(reinterpret_cast<char*>(&k), sizeof(k));
    f.read(reinterpret_cast<char*>(&alpha), sizeof(alpha));
    f.read(reinterpret_cast<char*>(&u), sizeof(u));
    if (!f) throw LoadError("truncated ensemble checkpoint: " + path);
    PredictionEnsemble ens = make_prediction_ensemble(n, k, alpha);
    ens.updates_applied = u;
    f.read(reinterpret_cast<char*>(ens.z_bar.values.data()),
           static_cast<std::streamsize>(ens.z_bar.values.size() * sizeof(double)));
    if (!f) throw LoadError("truncated ensemble checkpoint: " + path);
    return ens;
}

}  // namespace self
