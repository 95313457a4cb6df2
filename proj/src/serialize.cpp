#include "self/serialize.hpp"

namespace self {

using nlohmann::json;

void to_json(json& j, const LossBreakdown& b) {
    j = json{{"supervised", b.supervised},
             {"consistency", b.consistency},
             {"logit_distance", b.logit_distance},
             {"entropy_min", b.entropy_min},
             {"mean_entropy_max", b.mean_entropy_max},
             {"push_away", b.push_away},
             {"total", b.total}};
}

void from_json(const json& j, LossBreakdown& b) {
    j.at("supervised").get_to(b.supervised);
    j.at("consistency").get_to(b.consistency);
    j.at("logit_distance").get_to(b.logit_distance);
    j.at("entropy_min").get_to(b.entropy_min);
    j.at("mean_entropy_max").get_to(b.mean_entropy_max);
    j.at("push_away").get_to(b.push_away);
    j.at("total").get_to(b.total);
}

void to_json(json& j, const LossCounters& c) {
    j = json{{"nll_clamps", c.nll_clamps}, {"degenerate_supervised", c.degenerate_supervised}};
}

void from_json(const json& j, LossCounters& c) {
    j.at("nll_clamps").get_to(c.nll_clamps);
    j.at("degenerate_supervised").get_to(c.degenerate_supervised);
}

void to_json(json& j, const IterationResult& r) {
    j = json{{"iteration", r.iteration},
             {"best_val_acc", r.best_val_acc},
             {"best_epoch", r.best_epoch},
             {"epochs_run", r.epochs_run},
             {"active_count_before", r.active_count_before},
             {"active_count_after", r.active_count_after},
             {"filter_precision", r.filter_precision},
             {"filter_recall", r.filter_recall},
             {"filter_ties", r.filter_ties},
             {"filtered", r.filtered},
             {"teacher_val_curve", r.teacher_val_curve},
             {"student_val_curve", r.student_val_curve},
             {"train_loss_curve", r.train_loss_curve},
             {"train_loss_terms", r.train_loss_terms},
             {"test_acc_curve", r.test_acc_curve},
             {"counters", r.counters}};
}

void from_json(const json& j, IterationResult& r) {
    j.at("iteration").get_to(r.iteration);
    j.at("best_val_acc").get_to(r.best_val_acc);
    j.at("best_epoch").get_to(r.best_epoch);
    j.at("epochs_run").get_to(r.epochs_run);
    j.at("active_count_before").get_to(r.active_count_before);
    j.at("active_count_after").get_to(r.active_count_after);
    j.at("filter_precision").get_to(r.filter_precision);
    j.at("filter_recall").get_to(r.filter_recall);
    j.at("filter_ties").get_to(r.filter_ties);
    j.at("filtered").get_to(r.filtered);
    j.at("teacher_val_curve").get_to(r.teacher_val_curve);
    j.at("student_val_curve").get_to(r.student_val_curve);
    j.at("train_loss_curve").get_to(r.train_loss_curve);
    j.at("train_loss_terms").get_to(r.train_loss_terms);
    j.at("test_acc_curve").get_to(r.test_acc_curve);
    j.at("counters").get_to(r.counters);
}

}  // namespace self
