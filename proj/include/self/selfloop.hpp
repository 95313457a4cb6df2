#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "self/batch.hpp"
#include "self/dataset.hpp"
#include "self/ensemble.hpp"
#include "self/losses.hpp"
#include "self/mlp.hpp"

namespace self {

struct EarlyStopConfig {
    std::size_t max_epochs_per_iteration = 300;
    std::size_t patience = 50;
    std::size_t total_epoch_budget = 600;  // cap on the sum across filter iterations
};

// How the prediction ensemble is fed: a teacher pass after every training
// epoch, or a single pass of the best teacher at filter time.
enum class EnsembleAccumulation { PerEpoch, PerIteration };

struct FilterMode {
    EnsembleAccumulation accumulation = EnsembleAccumulation::PerEpoch;
    FilterStrategy strategy;
};

// BestVal keeps the snapshot with the highest validation accuracy and stops
// early on patience. Final runs the whole schedule and keeps the last model,
// which is how the plain supervised baseline is trained.
enum class ModelSelection { BestVal, Final };

// Everything one call of train_iteration needs besides the data.
struct TrainSettings {
    std::vector<std::size_t> hidden_dims = {64, 64};
    double lr = 0.05;
    double momentum = 0.9;
    double weight_decay = 2e-4;
    double teacher_decay = 0.99;
    BatchPlan batch;
    bool unlabeled_from_active_only = false;  // complete-removal mode
    bool accumulate_predictions = true;       // PerEpoch ensemble feeding on/off
    ModelSelection model_selection = ModelSelection::BestVal;
    LossConfig loss;
    EarlyStopConfig early_stop;
    std::uint64_t init_seed = 1;
    std::uint64_t shuffle_seed = 2;
};

struct IterationResult {
    std::size_t iteration = 0;
    MlpParams best_teacher;
    MlpParams best_student;  // snapshot at the best epoch; warm-start source
    double best_val_acc = 0.0;
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;

    // Filled by the filtering step that follows this iteration (if any).
    std::size_t active_count_before = 0;
    std::size_t active_count_after = 0;
    double filter_precision = 0.0;
    double filter_recall = 0.0;
    std::size_t filter_ties = 0;
    bool filtered = false;

    // Per-epoch curves for reporting.
    std::vector<double> teacher_val_curve;
    std::vector<double> student_val_curve;
    std::vector<double> train_loss_curve;
    std::vector<LossBreakdown> train_loss_terms;
    std::vector<double> test_acc_curve;  // empty when no test set was supplied

    LossCounters counters;
};

// stop is true once the first maximum of history lies at least `patience`
// entries in the past; best_index is that first maximum.
struct EarlyStopDecision {
    bool stop = false;
    std::size_t best_index = 0;
};
EarlyStopDecision early_stop_check(const std::vector<double>& val_history, std::size_t patience);

// Fraction of samples whose predicted class (ties to lowest index) matches
// the noisy label (vs_true = false) or the hidden truth (vs_true = true).
double accuracy(const MlpParams& params, const Dataset& ds, bool vs_true);

// One Mean Teacher training pass with early stopping on teacher validation
// accuracy. Honors epoch_budget (<= early_stop.max_epochs_per_iteration
// epochs are run). test, when given, only feeds the reporting curve.
IterationResult train_iteration(const Dataset& train, const Dataset& val,
                                const TrainSettings& settings,
                                const std::optional<MlpParams>& warm_start,
                                PredictionEnsemble& ens, const FilterMode& mode,
                                std::size_t iteration, std::size_t epoch_budget,
                                const Dataset* test = nullptr);

struct FilterOutcome {
    std::size_t active_before = 0;
    std::size_t active_after = 0;
    double precision = 0.0;  // kept labels that are truly clean / kept
    double recall = 0.0;     // kept clean labels / all clean labels
    std::size_t ties = 0;
};

// Resets every status to Active (filtering always restarts from the original
// label set), folds one best-teacher pass into ens in PerIteration mode, then
// removes every label the ensemble disagrees with.
FilterOutcome filter_labels(Dataset& ds, PredictionEnsemble& ens, const MlpParams& best_teacher,
                            const FilterMode& mode);

struct SelfRunConfig {
    TrainSettings train;
    FilterMode filter_mode;
    bool filtering_enabled = true;
    std::size_t max_filter_iterations = 10;
    bool reset_ensemble_each_iteration = false;
    bool warm_start = true;
    double ensemble_alpha = 0.6;
    std::string checkpoint_dir;  // empty disables checkpointing
};

struct SelfRunResult {
    std::vector<IterationResult> iterations;
    std::size_t best_iteration = 0;
    MlpParams best_model;  // teacher of the best iteration
    double best_val_acc = 0.0;
    std::size_t total_epochs = 0;
    bool resumed = false;
};

// Swappable training step so the outer loop can be driven by scripted
// trainers in tests.
using IterationTrainer = std::function<IterationResult(
    const Dataset& train, const Dataset& val, const std::optional<MlpParams>& warm_start,
    PredictionEnsemble& ens, std::size_t iteration, std::size_t epoch_budget)>;

// The outer loop: train, keep the best model, refilter from the original
// label set, and stop at the first strictly-worse iteration (or cap/budget).
SelfRunResult self_run(Dataset& train, const Dataset& val, const SelfRunConfig& cfg,
                       const IterationTrainer& trainer);

// Production entry point wiring train_iteration as the trainer.
SelfRunResult self_run(Dataset& train, const Dataset& val, const SelfRunConfig& cfg,
                       const Dataset* test = nullptr);

}  // namespace self
