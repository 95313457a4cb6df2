#include "self/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "self/errors.hpp"
#include "self/rng.hpp"
#include "self/serialize.hpp"

namespace self {

namespace fs = std::filesystem;

namespace {

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.class_count = ds.class_count;
    out.features = gather_rows(ds.features, rows);
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.labels[i] = ds.labels[rows[i]];
        out.labels[i].sample_id = i;
    }
    return out;
}

}  // namespace

SplitDatasets build_datasets(const ExperimentConfig& cfg) {
    Dataset pool;
    std::size_t n_train = 0, n_val = 0;

    switch (cfg.dataset_kind) {
        case DatasetKind::Blobs: {
            pool = make_blobs(cfg.blobs_classes, cfg.blobs_per_class, cfg.blobs_dim,
                              cfg.blobs_spread, cfg.seed_data);
            n_train = static_cast<std::size_t>(
                std::llround(cfg.train_fraction * static_cast<double>(pool.size())));
            n_val = static_cast<std::size_t>(
                std::llround(cfg.val_fraction * static_cast<double>(pool.size())));
            break;
        }
        case DatasetKind::Idx: {
            if (cfg.idx_images.empty() || cfg.idx_labels.empty())
                throw ConfigError("config: dataset.idx.images and dataset.idx.labels are required");
            pool = load_idx(cfg.idx_images, cfg.idx_labels);
            n_train = cfg.idx_train_count;
            n_val = cfg.idx_val_count;
            break;
        }
        case DatasetKind::Csv: {
            if (cfg.csv_train.empty()) throw ConfigError("config: dataset.csv.train is required");
            pool = load_csv(cfg.csv_train);
            n_train = static_cast<std::size_t>(
                std::llround(cfg.train_fraction * static_cast<double>(pool.size())));
            n_val = static_cast<std::size_t>(
                std::llround(cfg.val_fraction * static_cast<double>(pool.size())));
            break;
        }
    }
    if (n_train + n_val > pool.size())
        throw ConfigError("config: train+val split exceeds the data pool (" +
                          std::to_string(n_train) + "+" + std::to_string(n_val) + " > " +
                          std::to_string(pool.size()) + ")");
    const bool external_test = cfg.dataset_kind == DatasetKind::Csv && !cfg.csv_test.empty();
    if (!external_test && n_train + n_val == pool.size())
        throw ConfigError("config: train+val split leaves no test samples");

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed_data, 0x73706c69));  // "spli"
    rng.shuffle(order);

    SplitDatasets out;
    out.train = subset(pool, {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train)});
    out.val = subset(pool, {order.begin() + static_cast<std::ptrdiff_t>(n_train),
                            order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val)});
    if (cfg.dataset_kind == DatasetKind::Csv && !cfg.csv_test.empty()) {
        out.test = load_csv(cfg.csv_test);
    } else {
        out.test = subset(pool, {order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                                 order.end()});
    }

    // Train gets the configured noise; the validation set gets the same noise
    // distribution from an independent draw. The test set stays clean.
    apply_noise(out.train, cfg.noise, cfg.seed_noise);
    if (cfg.validation_mode == ValidationMode::Noisy) {
        apply_noise(out.val, cfg.noise, derive_seed(cfg.seed_noise, 0x76616c));  // "val"
    } else {
        if (out.val.size() > cfg.clean_subset_size) {
            std::vector<std::size_t> keep(cfg.clean_subset_size);
            std::iota(keep.begin(), keep.end(), 0);
            out.val = subset(out.val, keep);
        }
    }
    return out;
}

RunReport run_experiment(const ExperimentConfig& raw_cfg) {
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentConfig cfg = raw_cfg;
    apply_variant(cfg);

    SplitDatasets data = build_datasets(cfg);

    SelfRunConfig rc;
    rc.train.hidden_dims = cfg.hidden_dims;
    rc.train.lr = cfg.lr;
    rc.train.momentum = cfg.momentum;
    rc.train.weight_decay = cfg.weight_decay;
    rc.train.teacher_decay = cfg.teacher_decay;
    rc.train.batch = cfg.batch;
    rc.train.unlabeled_from_active_only = cfg.unlabeled_from_active_only;
    rc.train.model_selection = cfg.model_selection;
    rc.train.loss = cfg.loss;
    rc.train.early_stop = cfg.early_stop;
    rc.train.init_seed = cfg.seed_init;
    rc.train.shuffle_seed = derive_seed(cfg.seed_data, 0x73687566);  // "shuf"
    rc.filter_mode = cfg.filter_mode;
    rc.filtering_enabled = cfg.filtering_enabled;
    rc.max_filter_iterations = cfg.max_filter_iterations;
    rc.reset_ensemble_each_iteration = cfg.reset_ensemble_each_iteration;
    rc.warm_start = cfg.warm_start;
    rc.ensemble_alpha = cfg.ensemble_alpha;
    if (cfg.checkpoints) {
        rc.checkpoint_dir = (fs::path(cfg.out_dir) / "checkpoints").string();
        fs::create_directories(rc.checkpoint_dir);
    }

    SelfRunResult run = self_run(data.train, data.val, rc, &data.test);

    RunReport report;
    report.config_echo = config_to_json(cfg);
    report.variant = cfg.variant;
    report.iterations = std::move(run.iterations);
    report.best_iteration = run.best_iteration;
    report.best_val_acc = run.best_val_acc;
    report.total_epochs = run.total_epochs;
    report.resumed = run.resumed;
    report.final_test_acc = accuracy(run.best_model, data.test, true);
    report.train_size = data.train.size();

    std::size_t active = 0, active_clean = 0, clean = 0;
    for (const auto& rec : data.train.labels) {
        const bool is_clean = rec.original_label == rec.true_label;
        if (is_clean) ++clean;
        if (rec.status == LabelStatus::Active) {
            ++active;
            if (is_clean) ++active_clean;
        }
    }
    report.final_active_count = active;
    report.final_active_precision =
        active > 0 ? static_cast<double>(active_clean) / static_cast<double>(active) : 1.0;
    report.final_active_recall =
        clean > 0 ? static_cast<double>(active_clean) / static_cast<double>(clean) : 0.0;

    for (const auto& it : report.iterations) {
        report.counters.nll_clamps += it.counters.nll_clamps;
        report.counters.degenerate_supervised += it.counters.degenerate_supervised;
        report.filter_ties_total += it.filter_ties;
    }

    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    emit_report(report, cfg.out_dir);
    return report;
}

nlohmann::json report_to_json(const RunReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["config"] = report.config_echo;
    j["variant"] = report.variant;
    j["iterations"] = report.iterations;
    j["best_iteration"] = report.best_iteration;
    j["best_val_acc"] = report.best_val_acc;
    j["final_test_acc"] = report.final_test_acc;
    j["final_active_precision"] = report.final_active_precision;
    j["final_active_recall"] = report.final_active_recall;
    j["final_active_count"] = report.final_active_count;
    j["train_size"] = report.train_size;
    j["total_epochs"] = report.total_epochs;
    j["warnings"] = {{"nll_clamps", report.counters.nll_clamps},
                     {"degenerate_supervised", report.counters.degenerate_supervised},
                     {"filter_ties", report.filter_ties_total}};
    j["resumed"] = report.resumed;
    j["wall_time_seconds"] = report.wall_time_seconds;
    return j;
}

RunReport report_from_json(const nlohmann::json& j) {
    RunReport report;
    report.config_echo = j.at("config");
    j.at("variant").get_to(report.variant);
    report.iterations = j.at("iterations").get<std::vector<IterationResult>>();
    j.at("best_iteration").get_to(report.best_iteration);
    j.at("best_val_acc").get_to(report.best_val_acc);
    j.at("final_test_acc").get_to(report.final_test_acc);
    j.at("final_active_precision").get_to(report.final_active_precision);
    j.at("final_active_recall").get_to(report.final_active_recall);
    j.at("final_active_count").get_to(report.final_active_count);
    j.at("train_size").get_to(report.train_size);
    j.at("total_epochs").get_to(report.total_epochs);
    j.at("warnings").at("nll_clamps").get_to(report.counters.nll_clamps);
    j.at("warnings").at("degenerate_supervised").get_to(report.counters.degenerate_supervised);
    j.at("warnings").at("filter_ties").get_to(report.filter_ties_total);
    j.at("resumed").get_to(report.resumed);
    j.at("wall_time_seconds").get_to(report.wall_time_seconds);
    return report;
}

namespace {

void atomic_write(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw LoadError("cannot write " + tmp.string());
        f << contents;
        if (!f) throw LoadError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void emit_report(const RunReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);

    atomic_write(fs::path(out_dir) / "summary.json", report_to_json(report).dump(2) + "\n");

    std::string curves = "epoch,iteration,train_loss,student_val_acc,teacher_val_acc,test_acc\n";
    for (const auto& it : report.iterations) {
        for (std::size_t e = 0; e < it.epochs_run; ++e) {
            curves += std::to_string(e) + "," + std::to_string(it.iteration) + "," +
                      fmt_double(it.train_loss_curve[e]) + "," +
                      fmt_double(it.student_val_curve[e]) + "," +
                      fmt_double(it.teacher_val_curve[e]) + ",";
            curves += e < it.test_acc_curve.size() ? fmt_double(it.test_acc_curve[e]) : "";
            curves += "\n";
        }
    }
    atomic_write(fs::path(out_dir) / "curves.csv", curves);

    std::string filter = "iteration,active_count,precision,recall\n";
    for (const auto& it : report.iterations) {
        if (!it.filtered) continue;
        filter += std::to_string(it.iteration) + "," + std::to_string(it.active_count_after) +
                  "," + fmt_double(it.filter_precision) + "," + fmt_double(it.filter_recall) +
                  "\n";
    }
    atomic_write(fs::path(out_dir) / "filter.csv", filter);
}

RunReport load_report(const std::string& dir) {
    const fs::path path = fs::path(dir) / "summary.json";
    std::ifstream f(path);
    if (!f) throw LoadError("cannot open " + path.string());
    nlohmann::json j;
    f >> j;
    return report_from_json(j);
}

std::vector<RunReport> run_ablation_suite(const ExperimentConfig& base,
                                          const std::vector<std::string>& variants) {
    const auto& names = known_variants();
    for (const auto& v : variants) {
        if (std::find(names.begin(), names.end(), v) == names.end())
            throw ConfigError("unknown variant: " + v);
    }

    std::vector<RunReport> reports;
    for (const auto& v : variants) {
        ExperimentConfig cfg = base;
        cfg.variant = v;
        cfg.out_dir = (fs::path(base.out_dir) / (v + ".seed" + std::to_string(cfg.seed_data))).string();
        reports.push_back(run_experiment(cfg));
    }
    write_comparison_csv(reports, (fs::path(base.out_dir) / "comparison.csv").string());
    return reports;
}

void write_comparison_csv(const std::vector<RunReport>& reports, const std::string& path) {
    std::string csv =
        "variant,seed_data,final_test_acc,final_active_precision,final_active_recall,"
        "best_val_acc,iterations,total_epochs\n";
    std::map<std::string, std::pair<double, std::size_t>> mean_acc;  // variant -> (sum, count)
    for (const auto& r : reports) {
        const auto seed = r.config_echo.at("seed").at("data").get<std::uint64_t>();
        csv += r.variant + "," + std::to_string(seed) + "," + fmt_double(r.final_test_acc) + "," +
               fmt_double(r.final_active_precision) + "," + fmt_double(r.final_active_recall) +
               "," + fmt_double(r.best_val_acc) + "," + std::to_string(r.iterations.size()) +
               "," + std::to_string(r.total_epochs) + "\n";
        auto& acc = mean_acc[r.variant];
        acc.first += r.final_test_acc;
        ++acc.second;
    }
    for (const auto& [variant, acc] : mean_acc) {
        csv += variant + ",mean," +
               fmt_double(acc.first / static_cast<double>(acc.second)) + ",,,,,\n";
    }
    fs::create_directories(fs::path(path).parent_path());
    atomic_write(path, csv);
}

}  // namespace self
