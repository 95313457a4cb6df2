// Command line front end: run one experiment, run an ablation grid, or
// pretty-print a finished run directory.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "self/errors.hpp"
#include "self/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void print_report(const self::RunReport& r) {
    std::printf("variant            %s\n", r.variant.c_str());
    std::printf("iterations         %zu (best: %zu)\n", r.iterations.size(), r.best_iteration);
    std::printf("best val acc       %.4f\n", r.best_val_acc);
    std::printf("final test acc     %.4f\n", r.final_test_acc);
    std::printf("active labels      %zu / %zu (precision %.4f, recall %.4f)\n",
                r.final_active_count, r.train_size, r.final_active_precision,
                r.final_active_recall);
    std::printf("total epochs       %zu\n", r.total_epochs);
    std::printf("wall time          %.1fs\n", r.wall_time_seconds);
    std::printf("\n%-5s %-7s %-8s %-9s %-10s %-10s\n", "iter", "epochs", "val_acc", "active",
                "precision", "recall");
    for (const auto& it : r.iterations) {
        if (it.filtered) {
            std::printf("%-5zu %-7zu %-8.4f %-9zu %-10.4f %-10.4f\n", it.iteration, it.epochs_run,
                        it.best_val_acc, it.active_count_after, it.filter_precision,
                        it.filter_recall);
        } else {
            std::printf("%-5zu %-7zu %-8.4f %-9s %-10s %-10s\n", it.iteration, it.epochs_run,
                        it.best_val_acc, "-", "-", "-");
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-ensemble label filtering: noise-robust training"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string variants_arg;
    std::string seeds_arg;
    std::string report_dir;

    auto* run_cmd = app.add_subcommand("run", "Run one experiment");
    run_cmd->add_option("--config", config_path, "Config file path")->required();
    run_cmd->add_option("--override", overrides, "key=value override (repeatable)");

    auto* ablate_cmd = app.add_subcommand("ablate", "Run a variant comparison grid");
    ablate_cmd->add_option("--config", config_path, "Config file path")->required();
    ablate_cmd->add_option("--variants", variants_arg, "Comma separated variant list")->required();
    ablate_cmd->add_option("--seeds", seeds_arg,
                           "Comma separated master seeds; each expands to "
                           "(data=s, init=s+1, noise=s+2) shared across variants");
    ablate_cmd->add_option("--override", overrides, "key=value override (repeatable)");

    auto* report_cmd = app.add_subcommand("report", "Print and re-emit a finished run");
    report_cmd->add_option("--in", report_dir, "Run output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const self::ExperimentConfig cfg = self::parse_config(config_path, overrides);
            const self::RunReport report = self::run_experiment(cfg);
            print_report(report);
            std::printf("\nwrote %s/{summary.json,curves.csv,filter.csv}\n",
                        cfg.out_dir.c_str());
        } else if (ablate_cmd->parsed()) {
            const self::ExperimentConfig base = self::parse_config(config_path, overrides);
            const std::vector<std::string> variants = split_csv(variants_arg);
            if (variants.empty()) throw self::ConfigError("ablate: empty variant list");

            std::vector<self::RunReport> all;
            if (seeds_arg.empty()) {
                all = self::run_ablation_suite(base, variants);
            } else {
                for (const auto& seed_str : split_csv(seeds_arg)) {
                    self::ExperimentConfig cfg = base;
                    const auto s = static_cast<std::uint64_t>(std::stoull(seed_str));
                    cfg.seed_data = s;
                    cfg.seed_init = s + 1;
                    cfg.seed_noise = s + 2;
                    auto batch = self::run_ablation_suite(cfg, variants);
                    all.insert(all.end(), batch.begin(), batch.end());
                }
                self::write_comparison_csv(all, base.out_dir + "/comparison.csv");
            }
            for (const auto& r : all) {
                const auto seed = r.config_echo.at("seed").at("data").get<std::uint64_t>();
                std::printf("%-18s seed %-6llu test acc %.4f\n", r.variant.c_str(),
                            static_cast<unsigned long long>(seed), r.final_test_acc);
            }
            std::printf("\nwrote %s/comparison.csv\n", base.out_dir.c_str());
        } else if (report_cmd->parsed()) {
            const self::RunReport report = self::load_report(report_dir);
            print_report(report);
            self::emit_report(report, report_dir);
        }
    } catch (const self::NumericError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const self::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const self::LoadError& e) {
        std::cerr << "load error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
