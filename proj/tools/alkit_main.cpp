#include <CLI11.hpp>
#include <iostream>
#include <thread>

#include "alkit/errors.hpp"
#include "alkit/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string output_dir;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> strategies;
    int steps = -1;
    int step_size = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", args.output_dir, "output directory (overrides config and ALKIT_OUT_DIR)");
    cmd->add_option("--seed", args.seeds, "replace the config seed list");
    cmd->add_option("--strategy", args.strategies, "replace the config strategy list");
    cmd->add_option("--steps", args.steps, "override the number of annotation steps");
    cmd->add_option("--step-size", args.step_size, "override the annotation step size K");
}

alkit::ExperimentConfig load_with_overrides(const CommonArgs& args) {
    alkit::ExperimentConfig config = alkit::parse_config_file(args.config_path);
    if (!args.seeds.empty()) config.seeds = args.seeds;
    if (!args.strategies.empty()) {
        for (const std::string& id : args.strategies) {
            const auto& ids = alkit::strategy_ids();
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
                std::string msg = "unknown strategy '" + id + "'; valid ids:";
                for (const std::string& s : ids) msg += " " + s;
                throw alkit::ConfigError(msg);
            }
        }
        config.strategies = args.strategies;
    }
    if (args.steps >= 0) config.loop.steps = args.steps;
    if (args.step_size >= 0) config.loop.step_size = args.step_size;
    if (!args.output_dir.empty()) config.output_dir = args.output_dir;
    config.output_dir = alkit::default_output_dir(config.output_dir);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pool-based active learning benchmark harness"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args;
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    std::string report_dir;

    CLI::App* run = app.add_subcommand("run", "execute every (strategy, seed) run sequentially");
    add_common(run, run_args);

    CLI::App* sweep = app.add_subcommand("sweep", "execute runs with a bounded worker pool");
    add_common(sweep, sweep_args);
    sweep->add_option("--workers", workers, "parallel workers");

    CLI::App* report = app.add_subcommand("report", "aggregate a results directory into tables");
    report->add_option("--dir", report_dir, "results directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            alkit::run_experiment(load_with_overrides(run_args), 1, true, std::cout);
        } else if (sweep->parsed()) {
            if (workers < 1) throw alkit::ConfigError("--workers must be >= 1");
            alkit::run_experiment(load_with_overrides(sweep_args), workers, false, std::cout);
        } else if (report->parsed()) {
            alkit::report_results_dir(report_dir, std::cout);
        }
    } catch (const alkit::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const alkit::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
