#include <cstdint>
#include <iostream>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "oia/config.hpp"
#include "oia/harness.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool out_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file (key = value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--out", args.out_dir, "override the output directory")
        ->each([&args](const std::string&) { args.out_set = true; });
}

oia::ExperimentConfig resolve_config(const CommonArgs& args) {
    oia::ExperimentConfig cfg =
        args.config_path.empty() ? oia::default_config() : oia::load_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (args.out_set) cfg.out_dir = args.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cache-aware interference-alignment scheduling experiments"};
    app.require_subcommand(1);

    CommonArgs train_args, sweep_args, oracle_args;
    bool full = false;

    CLI::App* train_cmd =
        app.add_subcommand("train", "train one scheme and emit convergence.csv");
    add_common(train_cmd, train_args);
    train_cmd->add_flag("--full", full, "train for 5000 episodes instead of the configured count");

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "run the p_stay grid over all schemes, emit sweep.csv");
    add_common(sweep_cmd, sweep_args);

    CLI::App* oracle_cmd = app.add_subcommand(
        "oracle-check", "cross-check the learners against the small-instance solution");
    add_common(oracle_cmd, oracle_args);

    CLI11_PARSE(app, argc, argv);

    try {
        const int threads = oia::thread_limit_from_env();
        if (threads > 0) omp_set_num_threads(threads);

        if (train_cmd->parsed()) {
            oia::ExperimentConfig cfg = resolve_config(train_args);
            if (full) cfg.dqn.episodes = 5000;
            const oia::RunRecord record = oia::run_train(cfg, cfg.out_dir);
            std::cout << "scheme " << oia::to_string(record.scheme) << ", "
                      << record.curve.size() << " episodes, final average sum rate "
                      << record.avg_sum_rate << " bits/s/Hz\n"
                      << "wrote " << cfg.out_dir << "/convergence.csv\n";
        } else if (sweep_cmd->parsed()) {
            const oia::ExperimentConfig cfg = resolve_config(sweep_args);
            const std::vector<oia::RunRecord> records = oia::run_sweep(cfg, cfg.out_dir);
            std::cout << records.size() << " runs complete, wrote " << cfg.out_dir
                      << "/sweep.csv\n";
        } else if (oracle_cmd->parsed()) {
            const oia::ExperimentConfig cfg = resolve_config(oracle_args);
            const oia::OracleCheckReport report = oia::run_oracle_check(cfg, cfg.out_dir);
            std::cout << report.text;
            if (!report.pass()) {
                std::cerr << "oracle check FAILED\n";
                return 1;
            }
            std::cout << "oracle check passed\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
