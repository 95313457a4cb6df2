// Acceptance suite: each criterion prints one [PASS]/[FAIL] line and the
// process exits non-zero if any checked criterion fails.
//
// Usage: acceptance [N]   (N in 1..8; no argument runs everything)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "self/experiment.hpp"
#include "self/rng.hpp"
#include "testutil.hpp"

using namespace self;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void note(const std::string& s) { g_notes.push_back(s); }

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.c_str());
    for (const auto& n : g_notes) std::printf("         %s\n", n.c_str());
    g_notes.clear();
    if (!pass) ++g_failures;
    std::fflush(stdout);
}

std::string data_dir() {
#ifdef SELF_SOURCE_DIR
    return std::string(SELF_SOURCE_DIR) + "/data/mnist";
#else
    return "data/mnist";
#endif
}

// ---------------------------------------------------------------------------
// Criterion 1: analytic gradients vs central finite differences, every loss
// term covered, >= 20 (net, batch, loss-term) combinations, rel err < 1e-4,
// under 30 seconds.
// ---------------------------------------------------------------------------
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();

    struct TermCase {
        const char* name;
        LossConfig cfg;
    };
    std::vector<TermCase> cases;
    {
        LossConfig c;
        c.consistency_enabled = false;
        c.logit_distance_enabled = false;
        cases.push_back({"supervised", c});
    }
    {
        LossConfig c;
        c.consistency_kind = ConsistencyKind::MSE;
        c.consistency_weight = 25.0;
        c.rampup_epochs = 3;
        c.logit_distance_enabled = false;
        cases.push_back({"consistency_mse", c});
    }
    {
        LossConfig c;
        c.consistency_kind = ConsistencyKind::KL;
        c.consistency_weight = 4.0;
        c.rampup_epochs = 0;
        c.logit_distance_enabled = false;
        cases.push_back({"consistency_kl", c});
    }
    {
        LossConfig c;
        c.consistency_enabled = false;
        c.logit_distance_weight = 0.7;
        cases.push_back({"logit_distance", c});
    }
    {
        LossConfig c;
        c.consistency_enabled = false;
        c.logit_distance_enabled = false;
        c.entropy_min_enabled = true;
        c.entropy_min_weight = 1.2;
        cases.push_back({"entropy_min", c});
    }
    {
        LossConfig c;
        c.consistency_enabled = false;
        c.logit_distance_enabled = false;
        c.mean_entropy_max_enabled = true;
        c.mean_entropy_max_weight = 0.9;
        cases.push_back({"mean_entropy_max", c});
    }
    {
        LossConfig c;
        c.consistency_enabled = false;
        c.logit_distance_enabled = false;
        c.push_away_enabled = true;
        c.push_away_weight = 1.4;
        cases.push_back({"push_away", c});
    }
    {
        LossConfig c;
        c.consistency_weight = 8.0;
        c.rampup_epochs = 0;
        c.logit_distance_weight = 0.05;
        c.entropy_min_enabled = true;
        c.entropy_min_weight = 0.4;
        c.mean_entropy_max_enabled = true;
        c.mean_entropy_max_weight = 0.4;
        c.push_away_enabled = true;
        c.push_away_weight = 0.6;
        cases.push_back({"all_terms", c});
    }

    Rng rng(20251);
    std::size_t combos = 0;
    double worst = 0.0;
    std::string worst_case = "none";

    for (const auto& tc : cases) {
        for (int trial = 0; trial < 3; ++trial) {
            const std::size_t in = 2 + rng.below(3);
            const std::size_t hidden = 3 + rng.below(4);
            const std::size_t k = 3 + rng.below(3);
            const std::size_t n = 4 + rng.below(3);
            MlpParams params =
                mlp_init({in, hidden, k}, derive_seed(31, combos));
            const MlpParams teacher_net =
                mlp_init({in, hidden, k}, derive_seed(77, combos));
            Tensor2 batch(n, in);
            for (double& v : batch.values) v = rng.gauss();
            std::vector<int> labels(n);
            std::vector<std::uint8_t> supervised(n, 0), removed(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = static_cast<int>(rng.below(k));
                supervised[i] = i < n / 2 ? 1 : 0;
                removed[i] = i >= n - 2 ? 1 : 0;
            }
            const std::size_t epoch = rng.below(6);
            const Tensor2 teacher_logits = mlp_forward(teacher_net, batch);

            const auto loss_of = [&](const MlpParams& p) {
                return batch_loss_and_grad(tc.cfg, mlp_forward(p, batch), teacher_logits, labels,
                                           supervised, removed, epoch, static_cast<int>(k))
                    .breakdown.total;
            };
            const BatchLossResult res =
                batch_loss_and_grad(tc.cfg, mlp_forward(params, batch), teacher_logits, labels,
                                    supervised, removed, epoch, static_cast<int>(k));
            const Gradients analytic = mlp_backward(params, batch, res.logit_grad);
            const double err = testutil::max_grad_rel_err(params, loss_of, analytic);
            if (err > worst) {
                worst = err;
                worst_case = tc.name;
            }
            ++combos;
        }
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream detail;
    detail << combos << " combos, worst rel err " << worst << " (" << worst_case << "), "
           << secs << "s";
    report(1, combos >= 20 && worst < 1e-4 && secs < 30.0, "gradient suite", detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 2: teacher EMA matches the closed-form geometric sum and the
// prediction EMA matches (1 - alpha^t) * zhat, both within 1e-12.
// ---------------------------------------------------------------------------
void criterion_2() {
    double worst_teacher = 0.0;
    {
        const double beta = 0.97;
        Rng rng(5150);
        MlpParams init = mlp_init({3, 4, 2}, 1);
        TeacherState teacher = make_teacher(init, beta);
        std::vector<MlpParams> snapshots;
        const std::size_t t = 40;
        for (std::size_t i = 0; i < t; ++i) {
            MlpParams s = mlp_init({3, 4, 2}, derive_seed(2, i));
            for (auto& layer : s.layers) {
                for (double& v : layer.weight.values) v = rng.gauss();
                for (double& v : layer.bias) v = rng.gauss();
            }
            snapshots.push_back(std::move(s));
        }
        for (const auto& s : snapshots) teacher_ema_update(teacher, s);

        // Closed form: beta^t theta0 + (1-beta) sum_i beta^i theta_{t-i}.
        const auto flat = [](const MlpParams& p) {
            std::vector<double> out;
            for (const auto& layer : p.layers) {
                out.insert(out.end(), layer.weight.values.begin(), layer.weight.values.end());
                out.insert(out.end(), layer.bias.begin(), layer.bias.end());
            }
            return out;
        };
        const auto base = flat(init);
        std::vector<double> expected(base.size());
        for (std::size_t j = 0; j < base.size(); ++j)
            expected[j] = std::pow(beta, static_cast<double>(t)) * base[j];
        for (std::size_t i = 0; i < t; ++i) {
            const auto snap = flat(snapshots[t - 1 - i]);
            const double w = (1.0 - beta) * std::pow(beta, static_cast<double>(i));
            for (std::size_t j = 0; j < base.size(); ++j) expected[j] += w * snap[j];
        }
        const auto got = flat(teacher.params);
        for (std::size_t j = 0; j < base.size(); ++j)
            worst_teacher = std::max(worst_teacher, std::abs(got[j] - expected[j]));
    }

    double worst_pred = 0.0;
    {
        const double alpha = 0.6;
        PredictionEnsemble ens = make_prediction_ensemble(2, 4, alpha);
        const std::vector<double> zhat = {0.4, 0.3, 0.2, 0.1};
        const std::size_t t = 60;
        for (std::size_t i = 0; i < t; ++i) prediction_ema_update(ens, 1, zhat);
        const double factor = 1.0 - std::pow(alpha, static_cast<double>(t));
        for (std::size_t k = 0; k < 4; ++k) {
            worst_pred = std::max(worst_pred, std::abs(ens.z_bar.at(1, k) - factor * zhat[k]));
            worst_pred = std::max(worst_pred, std::abs(ens.z_bar.at(0, k)));  // untouched row
        }
    }

    std::ostringstream detail;
    detail << "teacher max abs err " << worst_teacher << ", prediction max abs err " << worst_pred;
    report(2, worst_teacher < 1e-12 && worst_pred < 1e-12, "EMA closed-form oracles",
           detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 3: exact flip counts per mode, no symmetric self-flips, asymmetric
// flips only along the map, chi-square uniformity at significance 0.001 on 1e5.
// ---------------------------------------------------------------------------
void criterion_3() {
    bool ok = true;
    std::ostringstream detail;

    {
        const int k = 10;
        const std::size_t n = 100000;
        std::vector<int> labels(n);
        Rng lrng(88);
        for (auto& y : labels) y = static_cast<int>(lrng.below(k));
        const auto recs = inject_symmetric(labels, 0.4, k, 424242);

        std::size_t flips = 0;
        bool self_flip = false;
        std::vector<std::size_t> buckets(k - 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (recs[i].true_label != labels[i]) ok = false;
            if (recs[i].original_label == recs[i].true_label) continue;
            ++flips;
            if (recs[i].original_label == recs[i].true_label) self_flip = true;
            const int rank = recs[i].original_label < recs[i].true_label
                                 ? recs[i].original_label
                                 : recs[i].original_label - 1;
            buckets[static_cast<std::size_t>(rank)]++;
        }
        const std::size_t expected_flips =
            static_cast<std::size_t>(std::llround(0.4 * static_cast<double>(n)));
        const std::vector<double> expected(
            k - 1, static_cast<double>(flips) / static_cast<double>(k - 1));
        const double chi2 = testutil::chi_square_stat(buckets, expected);
        // chi-square critical value, significance 0.001, 8 degrees of freedom.
        const bool chi_ok = chi2 < 26.12448155837614;
        ok = ok && flips == expected_flips && !self_flip && chi_ok;
        detail << "symmetric flips " << flips << "/" << expected_flips << ", chi2 " << chi2
               << " (< 26.124), ";
    }

    {
        // Pair-flip on the CIFAR-10 semantic map: exact per-class counts and
        // no flips outside the map.
        const std::size_t per_class = 1000;
        std::vector<int> labels;
        for (int c = 0; c < 10; ++c)
            for (std::size_t i = 0; i < per_class; ++i) labels.push_back(c);
        NoiseSpec spec;
        spec.kind = NoiseKind::PairFlip;
        spec.ratio = 0.4;
        spec.pair_map = cifar10_pair_map();
        const auto recs = inject_asymmetric(labels, spec, 77);

        std::map<int, std::size_t> per_source;
        bool map_ok = true;
        for (const auto& r : recs) {
            if (r.original_label == r.true_label) continue;
            ++per_source[r.true_label];
            bool found = false;
            for (const auto& [from, to] : spec.pair_map) {
                if (r.true_label == from && r.original_label == to) found = true;
            }
            map_ok = map_ok && found;
        }
        bool counts_ok = true;
        for (int c = 0; c < 10; ++c) {
            const bool mapped = c == 9 || c == 2 || c == 4 || c == 3 || c == 5;
            counts_ok = counts_ok && per_source[c] == (mapped ? 400u : 0u);
        }
        ok = ok && map_ok && counts_ok;
        detail << "pair-flip counts " << (counts_ok ? "exact" : "WRONG") << ", targets "
               << (map_ok ? "on-map" : "OFF-MAP") << ", ";
    }

    {
        // Next-class mode: every flip goes to (i+1) % K, exact count per class.
        const std::size_t per_class = 500;
        const int k = 8;
        std::vector<int> labels;
        for (int c = 0; c < k; ++c)
            for (std::size_t i = 0; i < per_class; ++i) labels.push_back(c);
        NoiseSpec spec;
        spec.kind = NoiseKind::NextClass;
        spec.ratio = 0.3;
        const auto recs = inject_asymmetric(labels, spec, 99);
        std::map<int, std::size_t> per_source;
        bool target_ok = true;
        for (const auto& r : recs) {
            if (r.original_label == r.true_label) continue;
            ++per_source[r.true_label];
            target_ok = target_ok && r.original_label == (r.true_label + 1) % k;
        }
        bool counts_ok = true;
        for (int c = 0; c < k; ++c) counts_ok = counts_ok && per_source[c] == 150u;
        ok = ok && target_ok && counts_ok;
        detail << "next-class " << (target_ok && counts_ok ? "exact" : "WRONG");
    }

    report(3, ok, "noise injector contracts", detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 4: Algorithm conformance on scripted traces: the loop-condition
// trace, reinstatement from L_0, and removed-label semantics.
// ---------------------------------------------------------------------------
void criterion_4() {
    bool ok = true;
    std::ostringstream detail;

    {
        // Loop-condition trace 0.80, 0.85, 0.85, 0.84.
        Dataset ds = make_blobs(3, 20, 2, 1.0, 3);
        const Dataset val = make_blobs(3, 10, 2, 1.0, 4);
        std::vector<std::size_t> calls;
        SelfRunConfig cfg;
        cfg.train.early_stop = {10, 5, 1000};
        cfg.max_filter_iterations = 10;
        const std::vector<double> accs = {0.80, 0.85, 0.85, 0.84};
        const IterationTrainer trainer = [&](const Dataset&, const Dataset&,
                                             const std::optional<MlpParams>&, PredictionEnsemble&,
                                             std::size_t iteration, std::size_t) {
            calls.push_back(iteration);
            IterationResult r;
            r.iteration = iteration;
            r.best_val_acc = accs.at(iteration);
            r.epochs_run = 1;
            r.best_teacher = mlp_init({2, 3}, 1);
            r.best_teacher.layers[0].bias[0] = static_cast<double>(iteration);
            r.best_student = r.best_teacher;
            return r;
        };
        const SelfRunResult run = self_run(ds, val, cfg, trainer);
        const bool trace_ok = calls.size() == 4 && run.best_iteration == 2 &&
                              run.best_model.layers[0].bias[0] == 2.0;
        ok = ok && trace_ok;
        detail << "trace(4 iters, best=3rd) " << (trace_ok ? "ok" : "WRONG") << ", ";
    }

    {
        // Restart-from-L_0 reinstatement.
        Dataset ds = make_blobs(4, 10, 2, 1.0, 9);
        PredictionEnsemble ens =
            make_prediction_ensemble(ds.size(), static_cast<std::size_t>(ds.class_count), 0.0);
        const FilterMode mode{EnsembleAccumulation::PerEpoch, {FilterRule::ArgmaxAgreement, 1}};
        const MlpParams unused = mlp_init({2, 4}, 1);

        for (std::size_t i = 0; i < ds.size(); ++i) {
            ens.z_bar.at(i, static_cast<std::size_t>(
                                i == 0 ? (ds.labels[0].original_label + 1) % 4
                                       : ds.labels[i].original_label)) = 1.0;
        }
        filter_labels(ds, ens, unused, mode);
        const bool removed_once = ds.labels[0].status == LabelStatus::Removed;

        ens.z_bar.row(0)[static_cast<std::size_t>((ds.labels[0].original_label + 1) % 4)] = 0.0;
        ens.z_bar.at(0, static_cast<std::size_t>(ds.labels[0].original_label)) = 1.0;
        filter_labels(ds, ens, unused, mode);
        const bool reinstated = ds.labels[0].status == LabelStatus::Active;
        ok = ok && removed_once && reinstated;
        detail << "reinstatement " << (removed_once && reinstated ? "ok" : "WRONG") << ", ";
    }

    {
        // Removed labels leave the supervised loss but stay in the
        // unsupervised stream.
        Dataset ds = make_blobs(3, 12, 2, 1.0, 11);
        ds.labels[1].status = LabelStatus::Removed;
        ds.labels[5].status = LabelStatus::Removed;

        const auto active = ds.active_indices();
        const auto stream = ds.all_indices();
        bool in_supervised = false;
        for (std::size_t id : active) in_supervised = in_supervised || id == 1 || id == 5;

        const BatchPlan plan{12, 4, 8};
        const auto batches = compose_batch(active, stream, plan, 42, 0);
        std::size_t removed_seen = 0;
        bool removed_in_labeled_slot = false;
        for (const auto& b : batches) {
            for (std::size_t i = 0; i < b.sample_ids.size(); ++i) {
                const bool is_removed = b.sample_ids[i] == 1 || b.sample_ids[i] == 5;
                if (!is_removed) continue;
                if (i < b.labeled_count) removed_in_labeled_slot = true;
                ++removed_seen;
            }
        }

        // And the loss side: a removed row contributes no supervised term.
        LossConfig lcfg;
        lcfg.consistency_weight = 10.0;
        lcfg.rampup_epochs = 0;
        Tensor2 logits(2, 3);
        logits.values = {2.0, -1.0, 0.5, 0.1, 0.2, 0.3};
        const std::vector<int> labels = {0, 1};
        const auto with = batch_loss_and_grad(lcfg, logits, logits, labels, {1, 1}, {0, 0}, 0, 3);
        const auto without = batch_loss_and_grad(lcfg, logits, logits, labels, {1, 0}, {0, 1}, 0, 3);
        const Tensor2 one_row = gather_rows(logits, {0});
        const auto solo = batch_loss_and_grad(lcfg, one_row, one_row, {0}, {1}, {0}, 0, 3);
        const bool loss_ok = with.breakdown.supervised != without.breakdown.supervised &&
                             std::abs(without.breakdown.supervised -
                                      solo.breakdown.supervised) < 1e-15 &&
                             with.breakdown.consistency == without.breakdown.consistency;

        ok = ok && !in_supervised && !removed_in_labeled_slot && removed_seen >= 2 && loss_ok;
        detail << "removed-label semantics "
               << (!in_supervised && !removed_in_labeled_slot && removed_seen >= 2 && loss_ok
                       ? "ok"
                       : "WRONG");
    }

    report(4, ok, "algorithm conformance on scripted traces", detail.str());
}

// ---------------------------------------------------------------------------
// Shared experiment configs for criteria 5-8 (desk scale, frozen).
// ---------------------------------------------------------------------------
ExperimentConfig blobs_config(std::uint64_t master_seed, double noise_ratio,
                              const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.dataset_kind = DatasetKind::Blobs;
    cfg.blobs_classes = 10;
    cfg.blobs_per_class = 500;
    cfg.blobs_dim = 2;
    cfg.blobs_spread = 1.0;
    cfg.noise.kind = NoiseKind::Symmetric;
    cfg.noise.ratio = noise_ratio;
    cfg.hidden_dims = {64, 64};
    // Desk-scale calibration, frozen after paired measurement runs: lr 0.02
    // keeps high-noise training out of the constant-prediction basin, weight
    // 10 on the summed-per-row MSE sits in the effective range of the
    // reference configuration's 100 with class-count-normalized MSE, the
    // longer ramp keeps the consistency term from freezing the student onto
    // an immature teacher, and the 0.2 train fraction puts the benchmark in
    // the estimation-limited regime where filtering has room to matter.
    cfg.lr = 0.02;
    cfg.loss.consistency_weight = 10.0;
    cfg.loss.rampup_epochs = 25;
    cfg.train_fraction = 0.2;
    cfg.early_stop = {150, 50, 450};
    cfg.max_filter_iterations = 6;
    cfg.ensemble_alpha = 0.8;
    cfg.out_dir = out_dir;
    cfg.seed_data = master_seed;
    cfg.seed_init = master_seed + 1;
    cfg.seed_noise = master_seed + 2;
    return cfg;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// Criterion 5: paired blobs benchmark at 40% symmetric noise over 3 seeds:
// SELF beats the no-filter supervised baseline by >= 10 points and the final
// Active set has precision >= 0.95 against hidden truth.
// ---------------------------------------------------------------------------
void criterion_5() {
    const std::vector<std::uint64_t> seeds = {101, 202, 303};
    std::vector<double> self_acc, base_acc, precision;
    const std::string root = "acceptance_out/criterion5";
    fs::remove_all(root);

    for (const auto seed : seeds) {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig self_cfg =
            blobs_config(seed, 0.4, root + "/self_full.seed" + std::to_string(seed));
        self_cfg.variant = "self_full";
        const RunReport self_report = run_experiment(self_cfg);

        ExperimentConfig base_cfg =
            blobs_config(seed, 0.4, root + "/baseline.seed" + std::to_string(seed));
        base_cfg.variant = "baseline";
        const RunReport base_report = run_experiment(base_cfg);

        self_acc.push_back(self_report.final_test_acc);
        base_acc.push_back(base_report.final_test_acc);
        precision.push_back(self_report.final_active_precision);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream line;
        line << "seed " << seed << ": self " << self_report.final_test_acc << " vs baseline "
             << base_report.final_test_acc << ", precision "
             << self_report.final_active_precision << " (" << secs << "s)";
        note(line.str());
    }

    const double gap = mean(self_acc) - mean(base_acc);
    const double min_precision = *std::min_element(precision.begin(), precision.end());
    std::ostringstream detail;
    detail << "mean self " << mean(self_acc) << ", mean baseline " << mean(base_acc) << ", gap "
           << gap * 100.0 << " pts (need >= 10), min precision " << min_precision
           << " (need >= 0.95)";
    report(5, gap >= 0.10 && min_precision >= 0.95, "blobs 40% noise benchmark", detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 6: ablation orderings at 80% noise on blobs, mean over 3 paired
// seeds: self_full >= self_no_pred_ema >= teacher_only >= baseline and
// self_full >= delete_removed.
// ---------------------------------------------------------------------------
void criterion_6() {
    const std::vector<std::uint64_t> seeds = {11, 22, 33};
    const std::vector<std::string> variants = {"baseline", "teacher_only", "self_no_pred_ema",
                                               "self_full", "delete_removed"};
    const std::string root = "acceptance_out/criterion6";
    fs::remove_all(root);

    std::map<std::string, std::vector<double>> accs;
    for (const auto seed : seeds) {
        ExperimentConfig base = blobs_config(seed, 0.8, root + "/seed" + std::to_string(seed));
        const auto reports = run_ablation_suite(base, variants);
        std::ostringstream line;
        line << "seed " << seed << ":";
        for (const auto& r : reports) {
            accs[r.variant].push_back(r.final_test_acc);
            line << " " << r.variant << " " << r.final_test_acc;
        }
        note(line.str());
    }

    const double self_full = mean(accs["self_full"]);
    const double no_pred = mean(accs["self_no_pred_ema"]);
    const double teacher = mean(accs["teacher_only"]);
    const double baseline = mean(accs["baseline"]);
    const double deleted = mean(accs["delete_removed"]);

    const bool ok = self_full >= no_pred && no_pred >= teacher && teacher >= baseline &&
                    self_full >= deleted;
    std::ostringstream detail;
    detail << "self_full " << self_full << " >= -mva-pred " << no_pred << " >= teacher "
           << teacher << " >= baseline " << baseline << "; self_full >= delete_removed "
           << deleted;
    report(6, ok, "ablation orderings at 80% noise", detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 7: MNIST subset (4000 train, 40% symmetric noise, 3 seeds):
// SELF >= baseline + 8 points, and the teacher validation curve dominates the
// student curve on >= 80% of epochs.
// ---------------------------------------------------------------------------
ExperimentConfig mnist_config(std::uint64_t master_seed, const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.dataset_kind = DatasetKind::Idx;
    cfg.idx_images = data_dir() + "/mnist-images-idx3-ubyte";
    cfg.idx_labels = data_dir() + "/mnist-labels-idx1-ubyte";
    cfg.idx_train_count = 4000;
    cfg.idx_val_count = 1000;
    cfg.noise.kind = NoiseKind::Symmetric;
    cfg.noise.ratio = 0.4;
    cfg.hidden_dims = {64, 64};
    cfg.lr = 0.05;
    cfg.loss.consistency_weight = 10.0;
    cfg.early_stop = {80, 10, 200};
    cfg.max_filter_iterations = 4;
    cfg.out_dir = out_dir;
    cfg.seed_data = master_seed;
    cfg.seed_init = master_seed + 1;
    cfg.seed_noise = master_seed + 2;
    return cfg;
}

void criterion_7() {
    const std::vector<std::uint64_t> seeds = {7, 17, 27};
    const std::string root = "acceptance_out/criterion7";
    fs::remove_all(root);

    std::vector<double> self_acc, base_acc;
    std::size_t teacher_wins = 0, epochs_total = 0;

    for (const auto seed : seeds) {
        ExperimentConfig self_cfg = mnist_config(seed, root + "/self_full.seed" + std::to_string(seed));
        self_cfg.variant = "self_full";
        const RunReport self_report = run_experiment(self_cfg);

        ExperimentConfig base_cfg = mnist_config(seed, root + "/baseline.seed" + std::to_string(seed));
        base_cfg.variant = "baseline";
        const RunReport base_report = run_experiment(base_cfg);

        self_acc.push_back(self_report.final_test_acc);
        base_acc.push_back(base_report.final_test_acc);
        for (const auto& it : self_report.iterations) {
            for (std::size_t e = 0; e < it.epochs_run; ++e) {
                if (it.teacher_val_curve[e] >= it.student_val_curve[e]) ++teacher_wins;
                ++epochs_total;
            }
        }
        std::ostringstream line;
        line << "seed " << seed << ": self " << self_report.final_test_acc << " vs baseline "
             << base_report.final_test_acc;
        note(line.str());
    }

    const double gap = mean(self_acc) - mean(base_acc);
    const double teacher_frac =
        static_cast<double>(teacher_wins) / static_cast<double>(epochs_total);
    std::ostringstream detail;
    detail << "mean self " << mean(self_acc) << ", mean baseline " << mean(base_acc) << ", gap "
           << gap * 100.0 << " pts (need >= 8); teacher >= student on "
           << teacher_frac * 100.0 << "% of epochs (need >= 80%)";
    report(7, gap >= 0.08 && teacher_frac >= 0.80, "MNIST-subset benchmark", detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 8: identical seeds produce identical summary.json (minus wall
// time) and identical filter decisions.
// ---------------------------------------------------------------------------
void criterion_8() {
    const std::string root = "acceptance_out/criterion8";
    fs::remove_all(root);

    ExperimentConfig cfg = blobs_config(55, 0.4, root + "/a");
    cfg.blobs_per_class = 80;  // smaller run, same engine path
    cfg.early_stop = {12, 6, 40};
    cfg.max_filter_iterations = 2;
    run_experiment(cfg);
    cfg.out_dir = root + "/b";
    run_experiment(cfg);

    const auto load = [](const std::string& p) {
        std::ifstream f(p);
        nlohmann::json j;
        f >> j;
        return j;
    };
    nlohmann::json a = load(root + "/a/summary.json");
    nlohmann::json b = load(root + "/b/summary.json");
    a.erase("wall_time_seconds");
    b.erase("wall_time_seconds");
    a.at("config").at("run").erase("out_dir");
    b.at("config").at("run").erase("out_dir");
    const bool summaries_equal = a.dump() == b.dump();

    const auto slurp = [](const std::string& p) {
        std::ifstream f(p);
        return std::string{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    };
    const bool filters_equal = slurp(root + "/a/filter.csv") == slurp(root + "/b/filter.csv");

    std::ostringstream detail;
    detail << "summary " << (summaries_equal ? "identical" : "DIFFERS") << ", filter decisions "
           << (filters_equal ? "identical" : "DIFFER");
    report(8, summaries_equal && filters_equal, "determinism", detail.str());
}

}  // namespace

int main(int argc, char** argv) {
    int which = 0;
    if (argc > 1) which = std::atoi(argv[1]);

    const auto want = [&](int n) { return which == 0 || which == n; };
    if (want(1)) criterion_1();
    if (want(2)) criterion_2();
    if (want(3)) criterion_3();
    if (want(4)) criterion_4();
    if (want(5)) criterion_5();
    if (want(6)) criterion_6();
    if (want(7)) criterion_7();
    if (want(8)) criterion_8();

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    return 0;
}
