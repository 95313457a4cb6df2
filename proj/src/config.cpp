#include "self/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "self/errors.hpp"

namespace self {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean for " + key + ": " + v);
}

double parse_double(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') throw ConfigError("config: bad number for " + key + ": " + v);
    return x;
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') throw ConfigError("config: bad integer for " + key + ": " + v);
    return x;
}

std::vector<std::size_t> parse_dims(const std::string& v, const std::string& key) {
    std::vector<std::size_t> dims;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) dims.push_back(parse_u64(item, key));
    }
    return dims;
}

std::vector<std::pair<int, int>> parse_pair_map(const std::string& v, const std::string& key) {
    if (v == "cifar10") return cifar10_pair_map();
    std::vector<std::pair<int, int>> map;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("config: bad pair map entry for " + key + ": " + item);
        map.emplace_back(static_cast<int>(parse_u64(trim(item.substr(0, colon)), key)),
                         static_cast<int>(parse_u64(trim(item.substr(colon + 1)), key)));
    }
    return map;
}

}  // namespace

void apply_config_override(ExperimentConfig& cfg, const std::string& raw_key,
                           const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string v = trim(raw_value);

    if (key == "dataset.kind") {
        if (v == "blobs") cfg.dataset_kind = DatasetKind::Blobs;
        else if (v == "idx") cfg.dataset_kind = DatasetKind::Idx;
        else if (v == "csv") cfg.dataset_kind = DatasetKind::Csv;
        else throw ConfigError("config: unknown dataset.kind: " + v);
    } else if (key == "dataset.blobs.classes") cfg.blobs_classes = static_cast<int>(parse_u64(v, key));
    else if (key == "dataset.blobs.per_class") cfg.blobs_per_class = parse_u64(v, key);
    else if (key == "dataset.blobs.dim") cfg.blobs_dim = parse_u64(v, key);
    else if (key == "dataset.blobs.spread") cfg.blobs_spread = parse_double(v, key);
    else if (key == "dataset.idx.images") cfg.idx_images = v;
    else if (key == "dataset.idx.labels") cfg.idx_labels = v;
    else if (key == "dataset.idx.train_count") cfg.idx_train_count = parse_u64(v, key);
    else if (key == "dataset.idx.val_count") cfg.idx_val_count = parse_u64(v, key);
    else if (key == "dataset.csv.train") cfg.csv_train = v;
    else if (key == "dataset.csv.test") cfg.csv_test = v;
    else if (key == "split.train_fraction") cfg.train_fraction = parse_double(v, key);
    else if (key == "split.val_fraction") cfg.val_fraction = parse_double(v, key);
    else if (key == "noise.kind") {
        if (v == "none") cfg.noise.kind = NoiseKind::None;
        else if (v == "symmetric") cfg.noise.kind = NoiseKind::Symmetric;
        else if (v == "pair_flip") cfg.noise.kind = NoiseKind::PairFlip;
        else if (v == "next_class") cfg.noise.kind = NoiseKind::NextClass;
        else throw ConfigError("config: unknown noise.kind: " + v);
    } else if (key == "noise.ratio") cfg.noise.ratio = parse_double(v, key);
    else if (key == "noise.pair_map") cfg.noise.pair_map = parse_pair_map(v, key);
    else if (key == "noise.exact_count") cfg.noise.exact_count = parse_bool(v, key);
    else if (key == "validation.mode") {
        if (v == "noisy") cfg.validation_mode = ValidationMode::Noisy;
        else if (v == "clean_subset") cfg.validation_mode = ValidationMode::CleanSubset;
        else throw ConfigError("config: unknown validation.mode: " + v);
    } else if (key == "validation.clean_subset_size") cfg.clean_subset_size = parse_u64(v, key);
    else if (key == "model.hidden") cfg.hidden_dims = parse_dims(v, key);
    else if (key == "optimizer.lr") cfg.lr = parse_double(v, key);
    else if (key == "optimizer.lr_supervised_only") cfg.lr_supervised_only = parse_double(v, key);
    else if (key == "optimizer.momentum") cfg.momentum = parse_double(v, key);
    else if (key == "optimizer.weight_decay") cfg.weight_decay = parse_double(v, key);
    else if (key == "batch.total") {
        cfg.batch.total = parse_u64(v, key);
        if (cfg.batch.labeled_per_batch <= cfg.batch.total)
            cfg.batch.unlabeled_per_batch = cfg.batch.total - cfg.batch.labeled_per_batch;
    } else if (key == "batch.labeled") {
        cfg.batch.labeled_per_batch = parse_u64(v, key);
        if (cfg.batch.labeled_per_batch <= cfg.batch.total)
            cfg.batch.unlabeled_per_batch = cfg.batch.total - cfg.batch.labeled_per_batch;
    }
    else if (key == "loss.consistency_weight") cfg.loss.consistency_weight = parse_double(v, key);
    else if (key == "loss.consistency_kind") {
        if (v == "mse") cfg.loss.consistency_kind = ConsistencyKind::MSE;
        else if (v == "kl") cfg.loss.consistency_kind = ConsistencyKind::KL;
        else throw ConfigError("config: unknown loss.consistency_kind: " + v);
    } else if (key == "loss.logit_distance_weight") cfg.loss.logit_distance_weight = parse_double(v, key);
    else if (key == "loss.rampup_epochs") cfg.loss.rampup_epochs = parse_u64(v, key);
    else if (key == "loss.entropy_min_weight") cfg.loss.entropy_min_weight = parse_double(v, key);
    else if (key == "loss.mean_entropy_max_weight") cfg.loss.mean_entropy_max_weight = parse_double(v, key);
    else if (key == "loss.push_away_weight") cfg.loss.push_away_weight = parse_double(v, key);
    else if (key == "loss.entropy_scope") {
        if (v == "all") cfg.loss.entropy_scope = EntropyScope::All;
        else if (v == "removed") cfg.loss.entropy_scope = EntropyScope::Removed;
        else throw ConfigError("config: unknown loss.entropy_scope: " + v);
    } else if (key == "early_stop.max_epochs") cfg.early_stop.max_epochs_per_iteration = parse_u64(v, key);
    else if (key == "early_stop.patience") cfg.early_stop.patience = parse_u64(v, key);
    else if (key == "early_stop.total_budget") cfg.early_stop.total_epoch_budget = parse_u64(v, key);
    else if (key == "early_stop.model_selection") {
        if (v == "best_val") cfg.model_selection = ModelSelection::BestVal;
        else if (v == "final") cfg.model_selection = ModelSelection::Final;
        else throw ConfigError("config: unknown early_stop.model_selection: " + v);
    } else if (key == "filter.enabled") cfg.filtering_enabled = parse_bool(v, key);
    else if (key == "filter.accumulation") {
        if (v == "per_epoch") cfg.filter_mode.accumulation = EnsembleAccumulation::PerEpoch;
        else if (v == "per_iteration") cfg.filter_mode.accumulation = EnsembleAccumulation::PerIteration;
        else throw ConfigError("config: unknown filter.accumulation: " + v);
    } else if (key == "filter.strategy") {
        if (v == "argmax") cfg.filter_mode.strategy.rule = FilterRule::ArgmaxAgreement;
        else if (v == "topk") cfg.filter_mode.strategy.rule = FilterRule::TopK;
        else throw ConfigError("config: unknown filter.strategy: " + v);
    } else if (key == "filter.topk") cfg.filter_mode.strategy.k = parse_u64(v, key);
    else if (key == "filter.max_iterations") cfg.max_filter_iterations = parse_u64(v, key);
    else if (key == "filter.reset_ensemble") cfg.reset_ensemble_each_iteration = parse_bool(v, key);
    else if (key == "ensemble.alpha") cfg.ensemble_alpha = parse_double(v, key);
    else if (key == "ensemble.beta") cfg.teacher_decay = parse_double(v, key);
    else if (key == "run.variant") cfg.variant = v;
    else if (key == "run.out_dir") cfg.out_dir = v;
    else if (key == "run.warm_start") cfg.warm_start = parse_bool(v, key);
    else if (key == "run.checkpoints") cfg.checkpoints = parse_bool(v, key);
    else if (key == "run.delete_removed") cfg.unlabeled_from_active_only = parse_bool(v, key);
    else if (key == "seed.data") cfg.seed_data = parse_u64(v, key);
    else if (key == "seed.init") cfg.seed_init = parse_u64(v, key);
    else if (key == "seed.noise") cfg.seed_noise = parse_u64(v, key);
    else throw ConfigError("config: unknown key: " + key);
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + path + ":" + std::to_string(line_no) +
                              ": expected key = value");
        apply_config_override(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
    ExperimentConfig cfg = parse_config_file(path);
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) throw ConfigError("override must be key=value: " + ov);
        apply_config_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
    }
    return cfg;
}

const std::vector<std::string>& known_variants() {
    static const std::vector<std::string> variants = {
        "baseline",       "filter_only", "teacher_only",     "self_no_pred_ema", "self_full",
        "delete_removed", "push_away",   "entropy_all",      "entropy_unlabeled"};
    return variants;
}

void apply_variant(ExperimentConfig& cfg) {
    const auto& names = known_variants();
    if (std::find(names.begin(), names.end(), cfg.variant) == names.end())
        throw ConfigError("unknown variant: " + cfg.variant);

    const auto supervised_only = [&cfg] {
        cfg.loss.consistency_enabled = false;
        cfg.loss.logit_distance_enabled = false;
        cfg.lr = cfg.lr_supervised_only;
    };
    const auto no_unsupervised_batches = [&cfg] {
        cfg.batch.labeled_per_batch = cfg.batch.total;
        cfg.batch.unlabeled_per_batch = 0;
    };
    const auto snapshot_ensembles = [&cfg] {
        cfg.teacher_decay = 0.0;   // teacher becomes a copy of the student
        cfg.ensemble_alpha = 0.0;  // prediction rows hold only the latest pass
    };

    if (cfg.variant == "self_full") {
        // Identity: the configured knobs already describe full SELF.
    } else if (cfg.variant == "baseline") {
        // Traditional supervised training on the full noisy label set.
        cfg.filtering_enabled = false;
        supervised_only();
        no_unsupervised_batches();
        snapshot_ensembles();
        cfg.model_selection = ModelSelection::Final;
    } else if (cfg.variant == "filter_only") {
        cfg.filtering_enabled = true;
        supervised_only();
        no_unsupervised_batches();
        snapshot_ensembles();
    } else if (cfg.variant == "teacher_only") {
        cfg.filtering_enabled = false;
    } else if (cfg.variant == "self_no_pred_ema") {
        cfg.filtering_enabled = true;
        cfg.ensemble_alpha = 0.0;
    } else if (cfg.variant == "delete_removed") {
        cfg.filtering_enabled = true;
        cfg.unlabeled_from_active_only = true;
    } else if (cfg.variant == "push_away") {
        cfg.filtering_enabled = true;
        supervised_only();
        snapshot_ensembles();
        cfg.loss.push_away_enabled = true;
    } else if (cfg.variant == "entropy_all") {
        cfg.filtering_enabled = true;
        supervised_only();
        snapshot_ensembles();
        cfg.loss.entropy_min_enabled = true;
        cfg.loss.mean_entropy_max_enabled = true;
        cfg.loss.entropy_scope = EntropyScope::All;
    } else if (cfg.variant == "entropy_unlabeled") {
        cfg.filtering_enabled = true;
        supervised_only();
        snapshot_ensembles();
        cfg.loss.entropy_min_enabled = true;
        cfg.loss.mean_entropy_max_enabled = true;
        cfg.loss.entropy_scope = EntropyScope::Removed;
    }

    if (cfg.batch.labeled_per_batch > cfg.batch.total)
        throw ConfigError("config: batch.labeled must be <= batch.total");
    cfg.batch.unlabeled_per_batch = cfg.batch.total - cfg.batch.labeled_per_batch;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["dataset"]["kind"] = cfg.dataset_kind == DatasetKind::Blobs  ? "blobs"
                           : cfg.dataset_kind == DatasetKind::Idx ? "idx"
                                                                   : "csv";
    j["dataset"]["blobs"] = {{"classes", cfg.blobs_classes},
                             {"per_class", cfg.blobs_per_class},
                             {"dim", cfg.blobs_dim},
                             {"spread", cfg.blobs_spread}};
    j["dataset"]["idx"] = {{"images", cfg.idx_images},
                           {"labels", cfg.idx_labels},
                           {"train_count", cfg.idx_train_count},
                           {"val_count", cfg.idx_val_count}};
    j["dataset"]["csv"] = {{"train", cfg.csv_train}, {"test", cfg.csv_test}};
    j["split"] = {{"train_fraction", cfg.train_fraction}, {"val_fraction", cfg.val_fraction}};
    j["noise"] = {{"kind", cfg.noise.kind == NoiseKind::None        ? "none"
                           : cfg.noise.kind == NoiseKind::Symmetric ? "symmetric"
                           : cfg.noise.kind == NoiseKind::PairFlip  ? "pair_flip"
                                                                     : "next_class"},
                  {"ratio", cfg.noise.ratio},
                  {"pair_map", cfg.noise.pair_map},
                  {"exact_count", cfg.noise.exact_count}};
    j["validation"] = {{"mode", cfg.validation_mode == ValidationMode::Noisy ? "noisy"
                                                                             : "clean_subset"},
                       {"clean_subset_size", cfg.clean_subset_size}};
    j["model"] = {{"hidden", cfg.hidden_dims}};
    j["optimizer"] = {{"lr", cfg.lr},
                      {"lr_supervised_only", cfg.lr_supervised_only},
                      {"momentum", cfg.momentum},
                      {"weight_decay", cfg.weight_decay}};
    j["batch"] = {{"total", cfg.batch.total},
                  {"labeled", cfg.batch.labeled_per_batch},
                  {"unlabeled", cfg.batch.unlabeled_per_batch}};
    j["loss"] = {{"consistency_weight", cfg.loss.consistency_weight},
                 {"consistency_kind",
                  cfg.loss.consistency_kind == ConsistencyKind::MSE ? "mse" : "kl"},
                 {"consistency_enabled", cfg.loss.consistency_enabled},
                 {"logit_distance_weight", cfg.loss.logit_distance_weight},
                 {"logit_distance_enabled", cfg.loss.logit_distance_enabled},
                 {"rampup_epochs", cfg.loss.rampup_epochs},
                 {"entropy_min_weight", cfg.loss.entropy_min_weight},
                 {"entropy_min_enabled", cfg.loss.entropy_min_enabled},
                 {"mean_entropy_max_weight", cfg.loss.mean_entropy_max_weight},
                 {"mean_entropy_max_enabled", cfg.loss.mean_entropy_max_enabled},
                 {"push_away_weight", cfg.loss.push_away_weight},
                 {"push_away_enabled", cfg.loss.push_away_enabled},
                 {"entropy_scope",
                  cfg.loss.entropy_scope == EntropyScope::All ? "all" : "removed"}};
    j["early_stop"] = {{"max_epochs", cfg.early_stop.max_epochs_per_iteration},
                       {"patience", cfg.early_stop.patience},
                       {"total_budget", cfg.early_stop.total_epoch_budget},
                       {"model_selection",
                        cfg.model_selection == ModelSelection::BestVal ? "best_val" : "final"}};
    j["filter"] = {{"enabled", cfg.filtering_enabled},
                   {"accumulation", cfg.filter_mode.accumulation == EnsembleAccumulation::PerEpoch
                                        ? "per_epoch"
                                        : "per_iteration"},
                   {"strategy", cfg.filter_mode.strategy.rule == FilterRule::ArgmaxAgreement
                                    ? "argmax"
                                    : "topk"},
                   {"topk", cfg.filter_mode.strategy.k},
                   {"max_iterations", cfg.max_filter_iterations},
                   {"reset_ensemble", cfg.reset_ensemble_each_iteration}};
    j["ensemble"] = {{"alpha", cfg.ensemble_alpha}, {"beta", cfg.teacher_decay}};
    j["run"] = {{"variant", cfg.variant},
                {"out_dir", cfg.out_dir},
                {"warm_start", cfg.warm_start},
                {"checkpoints", cfg.checkpoints},
                {"delete_removed", cfg.unlabeled_from_active_only}};
    j["seed"] = {{"data", cfg.seed_data}, {"init", cfg.seed_init}, {"noise", cfg.seed_noise}};
    return j;
}

}  // namespace self
