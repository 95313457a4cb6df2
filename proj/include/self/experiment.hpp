#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "self/config.hpp"
#include "self/dataset.hpp"
#include "self/selfloop.hpp"

namespace self {

struct SplitDatasets {
    Dataset train;
    Dataset val;
    Dataset test;  // always clean: never noised, never seen by training or filtering
};

// Builds, splits, and noises the data described by cfg. Exposed for tests.
SplitDatasets build_datasets(const ExperimentConfig& cfg);

struct RunReport {
    nlohmann::json config_echo;
    std::string variant;
    std::vector<IterationResult> iterations;
    std::size_t best_iteration = 0;
    double best_val_acc = 0.0;
    double final_test_acc = 0.0;
    double final_active_precision = 0.0;  // final Active set vs hidden truth
    double final_active_recall = 0.0;
    std::size_t final_active_count = 0;
    std::size_t train_size = 0;
    std::size_t total_epochs = 0;
    LossCounters counters;
    std::size_t filter_ties_total = 0;
    bool resumed = false;
    double wall_time_seconds = 0.0;  // excluded from determinism comparisons
};

// The full pipeline: build data, inject noise, run the filtering loop,
// compute metrics, emit summary.json + curves.csv + filter.csv.
RunReport run_experiment(const ExperimentConfig& cfg);

// Writes summary.json, curves.csv and filter.csv into out_dir (atomically,
// via rename). Re-emitting an unchanged report produces identical files.
void emit_report(const RunReport& report, const std::string& out_dir);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);
RunReport load_report(const std::string& dir);

// One run per variant on the base config's seeds; per-variant outputs go to
// <out_dir>/<variant>.seed<data_seed>/ and a comparison table is appended.
std::vector<RunReport> run_ablation_suite(const ExperimentConfig& base,
                                          const std::vector<std::string>& variants);

// comparison.csv over a set of finished reports (one row per report plus a
// mean row per variant).
void write_comparison_csv(const std::vector<RunReport>& reports, const std::string& path);

}  // namespace self
