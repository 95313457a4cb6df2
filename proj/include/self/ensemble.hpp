#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "self/mlp.hpp"

namespace self {

// Weight-space ensemble: exponential moving average of student snapshots.
// Never sees a gradient; every change goes through teacher_ema_update.
struct TeacherState {
    MlpParams params;
    double decay = 0.99;
    std::size_t updates_applied = 0;
};

TeacherState make_teacher(const MlpParams& student, double decay);

// theta' <- decay*theta' + (1-decay)*theta for every parameter.
void teacher_ema_update(TeacherState& teacher, const MlpParams& student);

// Per-sample running average of class-score vectors, zero-initialized.
struct PredictionEnsemble {
    Tensor2 z_bar;  // N x K
    double alpha = 0.6;
    std::size_t updates_applied = 0;

    std::size_t sample_count() const { return z_bar.rows; }
    std::size_t class_count() const { return z_bar.cols; }
};

PredictionEnsemble make_prediction_ensemble(std::size_t samples, std::size_t classes,
                                            double alpha);

// Row sample_id <- alpha*row + (1-alpha)*z_hat; all other rows untouched.
void prediction_ema_update(PredictionEnsemble& ens, std::size_t sample_id,
                           std::span<const double> z_hat);

enum class FilterRule { ArgmaxAgreement, TopK };

struct FilterStrategy {
    FilterRule rule = FilterRule::ArgmaxAgreement;
    std::size_t k = 1;  // TopK only
};

struct KeepDecision {
    bool keep = false;
    bool tie = false;  // a tie was broken by lowest class index
};

// ArgmaxAgreement keeps the label iff it is the argmax of the ensemble row;
// TopK keeps it iff it ranks among the k largest entries. Ties break toward
// the lowest class index and are flagged.
KeepDecision agreement_decision(std::span<const double> z_bar_row, int original_label,
                                const FilterStrategy& strategy);

bool agreement_keep(const PredictionEnsemble& ens, std::size_t sample_id, int original_label,
                    const FilterStrategy& strategy);

// Flat binary checkpoint: u64 N, u64 K, f64 alpha, u64 updates_applied,
// then N*K row-major doubles.
void save_prediction_ensemble(const PredictionEnsemble& ens, const std::string& path);
PredictionEnsemble load_prediction_ensemble(const std::string& path);

}  // namespace self
