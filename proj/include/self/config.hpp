#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "self/batch.hpp"
#include "self/dataset.hpp"
#include "self/losses.hpp"
#include "self/selfloop.hpp"

namespace self {

enum class DatasetKind { Blobs, Idx, Csv };
enum class ValidationMode { Noisy, CleanSubset };

// Fully materialized experiment description. Every field is echoed into the
// run report so a run is reconstructible from its summary alone.
struct ExperimentConfig {
    DatasetKind dataset_kind = DatasetKind::Blobs;
    int blobs_classes = 10;
    std::size_t blobs_per_class = 500;
    std::size_t blobs_dim = 2;
    double blobs_spread = 1.0;
    std::string idx_images;
    std::string idx_labels;
    std::size_t idx_train_count = 4000;
    std::size_t idx_val_count = 1000;  // remainder of the pool is the clean test set
    std::string csv_train;
    std::string csv_test;
    double train_fraction = 0.7;
    double val_fraction = 0.15;  // remainder is the clean test set

    NoiseSpec noise;
    ValidationMode validation_mode = ValidationMode::Noisy;
    std::size_t clean_subset_size = 1000;

    std::vector<std::size_t> hidden_dims = {64, 64};
    double lr = 0.05;
    double lr_supervised_only = 0.01;  // used by variants without unsupervised terms
    double momentum = 0.9;
    double weight_decay = 2e-4;

    BatchPlan batch{64, 16, 48};
    LossConfig loss;
    EarlyStopConfig early_stop;
    ModelSelection model_selection = ModelSelection::BestVal;

    bool filtering_enabled = true;
    FilterMode filter_mode;
    std::size_t max_filter_iterations = 10;
    bool reset_ensemble_each_iteration = false;
    double ensemble_alpha = 0.6;
    double teacher_decay = 0.99;
    bool warm_start = true;
    bool unlabeled_from_active_only = false;  // complete removal of filtered samples

    std::string variant = "self_full";
    std::string out_dir = "out";
    bool checkpoints = false;

    std::uint64_t seed_data = 1;
    std::uint64_t seed_init = 2;
    std::uint64_t seed_noise = 3;
};

// Text config: one `key = value` pair per line, '#' comments. Unknown keys
// are errors. See README for the key list.
ExperimentConfig parse_config_file(const std::string& path);

// Applies a single `key=value` override (same keys as the file format).
void apply_config_override(ExperimentConfig& cfg, const std::string& key,
                           const std::string& value);

ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides);

// Known ablation variants.
const std::vector<std::string>& known_variants();

// Projects the variant tag onto the loss/filter/batch/lr knobs. self_full is
// the identity; every other variant stomps the knobs it defines.
void apply_variant(ExperimentConfig& cfg);

// Full echo of the effective configuration.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace self
