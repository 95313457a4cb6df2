#include "self/selfloop.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "self/errors.hpp"
#include "self/optimizer.hpp"
#include "self/rng.hpp"
#include "self/serialize.hpp"

namespace self {

namespace fs = std::filesystem;

EarlyStopDecision early_stop_check(const std::vector<double>& val_history, std::size_t patience) {
    if (val_history.empty()) throw ConfigError("early_stop_check: empty history");
    std::size_t best = 0;
    for (std::size_t i = 1; i < val_history.size(); ++i) {
        if (val_history[i] > val_history[best]) best = i;  // first index attaining the max
    }
    const std::size_t since_best = val_history.size() - 1 - best;
    return {since_best >= patience, best};
}

double accuracy(const MlpParams& params, const Dataset& ds, bool vs_true) {
    if (ds.size() == 0) return 0.0;
    const Tensor2 logits = mlp_forward(params, ds.features);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const int pred = static_cast<int>(argmax_row(logits.row(i)));
        const int want = vs_true ? ds.labels[i].true_label : ds.labels[i].original_label;
        if (pred == want) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ds.size());
}

namespace {

std::size_t batches_per_epoch(const TrainSettings& settings, std::size_t active_count,
                              std::size_t stream_count) {
    const auto& plan = settings.batch;
    if (plan.unlabeled_per_batch == 0) {
        return (active_count + plan.labeled_per_batch - 1) / plan.labeled_per_batch;
    }
    return (stream_count + plan.unlabeled_per_batch - 1) / plan.unlabeled_per_batch;
}

void feed_prediction_ensemble(PredictionEnsemble& ens, const MlpParams& model,
                              const Dataset& train) {
    const Tensor2 probs = softmax_rows(mlp_forward(model, train.features));
    for (std::size_t i = 0; i < train.size(); ++i) {
        prediction_ema_update(ens, i, probs.row(i));
    }
}

}  // namespace

IterationResult train_iteration(const Dataset& train, const Dataset& val,
                                const TrainSettings& settings,
                                const std::optional<MlpParams>& warm_start,
                                PredictionEnsemble& ens, const FilterMode& mode,
                                std::size_t iteration, std::size_t epoch_budget,
                                const Dataset* test) {
    const std::vector<std::size_t> active = train.active_indices();
    if (active.empty()) throw ConfigError("train_iteration: no Active labels to train on");
    if (val.size() == 0) throw ConfigError("train_iteration: empty validation set");
    if (ens.sample_count() != train.size() ||
        ens.class_count() != static_cast<std::size_t>(train.class_count))
        throw ShapeError("train_iteration: prediction ensemble does not match dataset");

    const std::size_t max_epochs =
        std::min(settings.early_stop.max_epochs_per_iteration, epoch_budget);
    if (max_epochs == 0) throw ConfigError("train_iteration: epoch budget exhausted");

    std::vector<std::size_t> dims;
    dims.push_back(train.features.cols);
    dims.insert(dims.end(), settings.hidden_dims.begin(), settings.hidden_dims.end());
    dims.push_back(static_cast<std::size_t>(train.class_count));

    MlpParams student =
        warm_start ? *warm_start : mlp_init(dims, derive_seed(settings.init_seed, iteration));
    require_shape(student.input_dim() == train.features.cols &&
                      student.output_dim() == static_cast<std::size_t>(train.class_count),
                  "train_iteration: warm start model does not fit the dataset");
    TeacherState teacher = make_teacher(student, settings.teacher_decay);

    const std::vector<std::size_t> stream =
        settings.unlabeled_from_active_only ? active : train.all_indices();
    const std::size_t per_epoch = batches_per_epoch(settings, active.size(), stream.size());
    OptimizerState opt = make_optimizer(student, settings.lr, settings.weight_decay,
                                        std::max<std::size_t>(1, max_epochs * per_epoch));

    IterationResult result;
    result.iteration = iteration;
    result.active_count_before = active.size();
    result.active_count_after = active.size();

    const std::uint64_t batch_seed = derive_seed(settings.shuffle_seed, 0x65706f63, iteration);
    std::vector<double> history;
    double best_acc = -1.0;

    for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
        const auto batches = compose_batch(active, stream, settings.batch, batch_seed, epoch);
        LossBreakdown epoch_terms;
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            const Batch& b = batches[bi];
            const Tensor2 x = gather_rows(train.features, b.sample_ids);
            std::vector<int> labels(b.sample_ids.size());
            std::vector<std::uint8_t> supervised_mask(b.sample_ids.size(), 0);
            std::vector<std::uint8_t> removed_mask(b.sample_ids.size(), 0);
            for (std::size_t i = 0; i < b.sample_ids.size(); ++i) {
                const LabelRecord& rec = train.labels[b.sample_ids[i]];
                labels[i] = rec.original_label;
                supervised_mask[i] = i < b.labeled_count ? 1 : 0;
                removed_mask[i] = rec.status == LabelStatus::Removed ? 1 : 0;
            }

            const Tensor2 student_logits = mlp_forward(student, x);
            const Tensor2 teacher_logits = mlp_forward(teacher.params, x);
            BatchLossResult blr =
                batch_loss_and_grad(settings.loss, student_logits, teacher_logits, labels,
                                    supervised_mask, removed_mask, epoch, train.class_count);
            if (!std::isfinite(blr.breakdown.total)) {
                std::ostringstream msg;
                msg << "non-finite loss at iteration " << iteration << " epoch " << epoch
                    << " batch " << bi << " (supervised=" << blr.breakdown.supervised
                    << " consistency=" << blr.breakdown.consistency
                    << " total=" << blr.breakdown.total << ")";
                throw NumericError(msg.str());
            }

            const Gradients grads = mlp_backward(student, x, blr.logit_grad);
            sgd_nesterov_step(student, grads, opt, settings.momentum);
            teacher_ema_update(teacher, student);

            epoch_terms.supervised += blr.breakdown.supervised;
            epoch_terms.consistency += blr.breakdown.consistency;
            epoch_terms.logit_distance += blr.breakdown.logit_distance;
            epoch_terms.entropy_min += blr.breakdown.entropy_min;
            epoch_terms.mean_entropy_max += blr.breakdown.mean_entropy_max;
            epoch_terms.push_away += blr.breakdown.push_away;
            epoch_terms.total += blr.breakdown.total;
            result.counters.nll_clamps += blr.counters.nll_clamps;
            result.counters.degenerate_supervised += blr.counters.degenerate_supervised;
        }

        const double inv = batches.empty() ? 0.0 : 1.0 / static_cast<double>(batches.size());
        epoch_terms.supervised *= inv;
        epoch_terms.consistency *= inv;
        epoch_terms.logit_distance *= inv;
        epoch_terms.entropy_min *= inv;
        epoch_terms.mean_entropy_max *= inv;
        epoch_terms.push_away *= inv;
        epoch_terms.total *= inv;
        result.train_loss_terms.push_back(epoch_terms);
        result.train_loss_curve.push_back(epoch_terms.total);

        const double teacher_val = accuracy(teacher.params, val, false);
        const double student_val = accuracy(student, val, false);
        result.teacher_val_curve.push_back(teacher_val);
        result.student_val_curve.push_back(student_val);
        if (test) result.test_acc_curve.push_back(accuracy(teacher.params, *test, true));

        if (settings.accumulate_predictions && mode.accumulation == EnsembleAccumulation::PerEpoch) {
            feed_prediction_ensemble(ens, teacher.params, train);
        }

        history.push_back(teacher_val);
        if (teacher_val > best_acc) {
            best_acc = teacher_val;
            if (settings.model_selection == ModelSelection::BestVal) {
                result.best_teacher = teacher.params;
                result.best_student = student;
                result.best_epoch = epoch;
            }
        }
        result.epochs_run = epoch + 1;

        if (settings.model_selection == ModelSelection::BestVal &&
            early_stop_check(history, settings.early_stop.patience).stop)
            break;
    }

    if (settings.model_selection == ModelSelection::Final) {
        // Traditional training: the model at the end of the schedule.
        result.best_teacher = teacher.params;
        result.best_student = student;
        result.best_epoch = result.epochs_run - 1;
        result.best_val_acc = history.back();
    } else {
        result.best_val_acc = best_acc;
    }
    return result;
}

FilterOutcome filter_labels(Dataset& ds, PredictionEnsemble& ens, const MlpParams& best_teacher,
                            const FilterMode& mode) {
    if (ens.sample_count() != ds.size() ||
        ens.class_count() != static_cast<std::size_t>(ds.class_count))
        throw ShapeError("filter_labels: prediction ensemble does not match dataset");

    FilterOutcome outcome;
    outcome.active_before = ds.active_count();

    // Filtering always restarts from the original label set L_0.
    for (auto& rec : ds.labels) rec.status = LabelStatus::Active;

    if (mode.accumulation == EnsembleAccumulation::PerIteration) {
        const Tensor2 probs = softmax_rows(mlp_forward(best_teacher, ds.features));
        for (std::size_t i = 0; i < ds.size(); ++i) {
            prediction_ema_update(ens, i, probs.row(i));
        }
    }

    std::size_t kept = 0, kept_clean = 0, clean_total = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        LabelRecord& rec = ds.labels[i];
        const bool is_clean = rec.original_label == rec.true_label;
        if (is_clean) ++clean_total;
        const KeepDecision d =
            agreement_decision(ens.z_bar.row(i), rec.original_label, mode.strategy);
        if (d.tie) ++outcome.ties;
        if (d.keep) {
            ++kept;
            if (is_clean) ++kept_clean;
        } else {
            rec.status = LabelStatus::Removed;
        }
    }
    outcome.active_after = kept;
    outcome.precision = kept > 0 ? static_cast<double>(kept_clean) / static_cast<double>(kept) : 1.0;
    outcome.recall = clean_total > 0
                         ? static_cast<double>(kept_clean) / static_cast<double>(clean_total)
                         : 0.0;
    return outcome;
}

namespace {

std::string iteration_dir(const std::string& root, std::size_t iteration) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "iter_%03zu", iteration);
    return (fs::path(root) / buf).string();
}

void persist_iteration(const std::string& root, const IterationResult& result,
                       const PredictionEnsemble& ens, const Dataset& train) {
    const fs::path dir = iteration_dir(root, result.iteration);
    fs::create_directories(dir);
    save_mlp(result.best_teacher, (dir / "teacher.bin").string());
    save_mlp(result.best_student, (dir / "student.bin").string());
    save_prediction_ensemble(ens, (dir / "ens.bin").string());
    {
        std::ofstream f(dir / "status.bin", std::ios::binary);
        const std::uint64_t n = train.size();
        f.write(reinterpret_cast<const char*>(&n), sizeof(n));
        for (const auto& rec : train.labels) {
            const std::uint8_t s = rec.status == LabelStatus::Removed ? 1 : 0;
            f.write(reinterpret_cast<const char*>(&s), 1);
        }
    }
    // result.json is written last and acts as the completion marker, so it
    // goes through a temp file + rename to never exist half-written.
    const nlohmann::json j = result;
    const fs::path tmp = dir / "result.json.tmp";
    {
        std::ofstream f(tmp);
        f << j.dump(2) << "\n";
        if (!f) throw LoadError("short write to checkpoint record " + tmp.string());
    }
    fs::rename(tmp, dir / "result.json");
}

struct PersistedRun {
    std::vector<IterationResult> results;
    PredictionEnsemble ens;
    std::vector<LabelStatus> statuses;
    bool any = false;
};

PersistedRun load_persisted(const std::string& root, std::size_t expected_n) {
    PersistedRun out;
    for (std::size_t i = 0;; ++i) {
        const fs::path dir = iteration_dir(root, i);
        const fs::path marker = dir / "result.json";
        if (!fs::exists(marker)) break;
        std::ifstream f(marker);
        nlohmann::json j;
        f >> j;
        IterationResult r = j.get<IterationResult>();
        r.best_teacher = load_mlp((dir / "teacher.bin").string());
        r.best_student = load_mlp((dir / "student.bin").string());
        out.results.push_back(std::move(r));
        out.any = true;

        out.ens = load_prediction_ensemble((dir / "ens.bin").string());
        std::ifstream sf(dir / "status.bin", std::ios::binary);
        std::uint64_t n = 0;
        sf.read(reinterpret_cast<char*>(&n), sizeof(n));
        if (!sf || n != expected_n) throw LoadError("checkpoint status count mismatch in " + dir.string());
        out.statuses.resize(n);
        for (auto& s : out.statuses) {
            std::uint8_t b = 0;
            sf.read(reinterpret_cast<char*>(&b), 1);
            s = b ? LabelStatus::Removed : LabelStatus::Active;
        }
    }
    return out;
}

}  // namespace

SelfRunResult self_run(Dataset& train, const Dataset& val, const SelfRunConfig& cfg,
                       const IterationTrainer& trainer) {
    SelfRunResult run;
    std::size_t budget = cfg.train.early_stop.total_epoch_budget;

    PredictionEnsemble ens = make_prediction_ensemble(
        train.size(), static_cast<std::size_t>(train.class_count), cfg.ensemble_alpha);

    auto& results = run.iterations;
    if (!cfg.checkpoint_dir.empty()) {
        PersistedRun persisted = load_persisted(cfg.checkpoint_dir, train.size());
        if (persisted.any) {
            results = std::move(persisted.results);
            ens = std::move(persisted.ens);
            for (std::size_t i = 0; i < train.size(); ++i)
                train.labels[i].status = persisted.statuses[i];
            for (const auto& r : results) {
                budget = budget >= r.epochs_run ? budget - r.epochs_run : 0;
            }
            run.resumed = true;
        }
    }

    if (results.empty()) {
        // Iteration 0 trains on the full (noisy) label set.
        for (auto& rec : train.labels) rec.status = LabelStatus::Active;
        results.push_back(trainer(train, val, std::nullopt, ens, 0, budget));
        budget = budget >= results.back().epochs_run ? budget - results.back().epochs_run : 0;
        if (!cfg.checkpoint_dir.empty()) persist_iteration(cfg.checkpoint_dir, results.back(), ens, train);
    }

    std::size_t best = 0;
    std::size_t cur = 0;
    while (true) {
        // Algorithm loop head: keep M_i as M_best while it is at least as good.
        if (cur > 0) {
            if (results[cur].best_val_acc >= results[best].best_val_acc) {
                best = cur;
            } else {
                break;  // first strictly-worse iteration ends the run
            }
        }
        if (cur + 1 < results.size()) {
            // Replaying persisted iterations; their filter step already ran.
            ++cur;
            continue;
        }

        if (!cfg.filtering_enabled) break;
        if (cur >= cfg.max_filter_iterations) break;
        if (budget == 0) break;

        if (!results[cur].filtered) {
            if (cfg.reset_ensemble_each_iteration) {
                ens = make_prediction_ensemble(train.size(),
                                               static_cast<std::size_t>(train.class_count),
                                               cfg.ensemble_alpha);
            }
            const FilterOutcome outcome =
                filter_labels(train, ens, results[best].best_teacher, cfg.filter_mode);
            results[cur].filtered = true;
            results[cur].active_count_before = outcome.active_before;
            results[cur].active_count_after = outcome.active_after;
            results[cur].filter_precision = outcome.precision;
            results[cur].filter_recall = outcome.recall;
            results[cur].filter_ties = outcome.ties;
            if (!cfg.checkpoint_dir.empty())
                persist_iteration(cfg.checkpoint_dir, results[cur], ens, train);
        }

        std::optional<MlpParams> warm;
        if (cfg.warm_start) warm = results[best].best_student;
        results.push_back(trainer(train, val, warm, ens, results.size(), budget));
        budget = budget >= results.back().epochs_run ? budget - results.back().epochs_run : 0;
        if (!cfg.checkpoint_dir.empty()) persist_iteration(cfg.checkpoint_dir, results.back(), ens, train);
        ++cur;
    }

    run.best_iteration = best;
    run.best_model = results[best].best_teacher;
    run.best_val_acc = results[best].best_val_acc;
    run.total_epochs = 0;
    for (const auto& r : results) run.total_epochs += r.epochs_run;
    return run;
}

SelfRunResult self_run(Dataset& train, const Dataset& val, const SelfRunConfig& cfg,
                       const Dataset* test) {
    TrainSettings settings = cfg.train;
    settings.accumulate_predictions =
        cfg.filtering_enabled &&
        cfg.filter_mode.accumulation == EnsembleAccumulation::PerEpoch;
    const FilterMode mode = cfg.filter_mode;
    const IterationTrainer trainer = [&settings, &mode, test](
                                         const Dataset& tr, const Dataset& va,
                                         const std::optional<MlpParams>& warm,
                                         PredictionEnsemble& ens, std::size_t iteration,
                                         std::size_t epoch_budget) {
        return train_iteration(tr, va, settings, warm, ens, mode, iteration, epoch_budget, test);
    };
    return self_run(train, val, cfg, trainer);
}

}  // namespace self
