#include "alkit/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

#include "alkit/errors.hpp"

namespace alkit {

namespace {

constexpr std::uint64_t kRunSplitTag = 0x52554e53;

struct Job {
    std::string strategy;
    std::uint64_t seed = 0;
};

std::string run_file_name(const std::string& dataset, const Job& job) {
    return dataset + "_" + job.strategy + "_seed" + std::to_string(job.seed) + ".json";
}

}  // namespace

std::string default_output_dir(const std::string& configured) {
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("ALKIT_OUT_DIR"); env != nullptr && *env != '\0') return env;
    return "results";
}

void run_experiment(const ExperimentConfig& config, int workers, bool per_step_progress, std::ostream& log) {
    const LoadedData data = load_dataset(config.dataset);

    std::vector<Job> jobs;
    for (const std::string& strategy : config.strategies)
        for (std::uint64_t seed : config.seeds) jobs.push_back({strategy, seed});

    // data-dependent defaults become explicit before anything runs
    ExperimentConfig resolved = config;
    {
        const Split probe = build_split(config, data.dataset, data.external_test_count,
                                        derive_seed(config.seeds.front(), kRunSplitTag));
        resolved.loop.step_size = resolve_step_size(config, static_cast<int>(probe.train_idx.size()));
    }
    resolved.output_dir = default_output_dir(config.output_dir);
    log << "resolved config:\n" << config_to_json(resolved).dump(2) << "\n";
    log << jobs.size() << " runs (" << config.strategies.size() << " strategies x " << config.seeds.size()
        << " seeds), workers=" << workers << "\n";

    std::vector<RunRecord> records(jobs.size());
    std::vector<std::string> failures(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    const auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            try {
                LoopConfig loop_cfg = resolved.loop;
                loop_cfg.strategy = job.strategy;
                loop_cfg.seed = job.seed;
                const Split split = build_split(resolved, data.dataset, data.external_test_count,
                                                derive_seed(job.seed, kRunSplitTag));
                StepCallback on_step;
                if (per_step_progress) {
                    on_step = [&](const StepRecord& rec) {
                        std::lock_guard<std::mutex> lock(log_mutex);
                        log << "[" << data.dataset.name << " " << job.strategy << " seed " << job.seed << "] step "
                            << rec.step << "/" << loop_cfg.steps << " train=" << rec.train_size
                            << " acc=" << format_real(rec.test_accuracy);
                        if (rec.mistake_selection_rate)
                            log << " mistake=" << format_real(*rec.mistake_selection_rate);
                        log << "\n";
                    };
                }
                records[i] = run_active_learning(data.dataset, split, loop_cfg, on_step);
                if (!per_step_progress) {
                    std::lock_guard<std::mutex> lock(log_mutex);
                    log << "done: " << data.dataset.name << " " << job.strategy << " seed " << job.seed
                        << " final acc=" << format_real(records[i].steps.back().test_accuracy)
                        << (records[i].truncated ? " (truncated)" : "") << "\n";
                }
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };

    const int thread_count = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }

    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (!failures[i].empty())
            throw Error("run " + jobs[i].strategy + "/seed " + std::to_string(jobs[i].seed) +
                        " failed: " + failures[i]);

    const std::filesystem::path out_dir = resolved.output_dir;
    std::filesystem::create_directories(out_dir / "runs");
    write_file_atomic(out_dir / "config_resolved.json", config_to_json(resolved).dump(2) + "\n");
    std::string csv = results_csv_header();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        write_file_atomic(out_dir / "runs" / run_file_name(data.dataset.name, jobs[i]),
                          run_record_to_json(records[i]).dump(2) + "\n");
        csv += results_csv_rows(records[i]);
    }
    write_file_atomic(out_dir / "results.csv", csv);
    log << "wrote " << (out_dir / "results.csv").string() << " and " << jobs.size() << " run records\n";
}

ReportTables report_results_dir(const std::string& results_dir, std::ostream& log) {
    const std::filesystem::path dir = results_dir;
    std::string csv_content;
    if (std::filesystem::exists(dir / "results.csv")) {
        csv_content = read_file(dir / "results.csv");
    } else if (std::filesystem::is_directory(dir / "runs")) {
        // rebuild the rows from the run records through the same CSV path so
        // both sources aggregate identically
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir / "runs"))
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw ConfigError("no run records found in " + (dir / "runs").string());
        csv_content = results_csv_header();
        for (const auto& file : files)
            csv_content += results_csv_rows(run_record_from_json(nlohmann::json::parse(read_file(file))));
    } else {
        throw ConfigError("results directory has neither results.csv nor runs/: " + results_dir);
    }

    const std::vector<RunRow> rows = parse_results_csv(csv_content);
    ReportTables tables = build_report(rows);
    write_file_atomic(dir / "summary.csv", tables.summary_csv);
    write_file_atomic(dir / "summary.txt", tables.summary_text);
    write_file_atomic(dir / "mistake_table.csv", tables.mistake_csv);
    write_file_atomic(dir / "mistake_table.txt", tables.mistake_text);
    log << tables.summary_text << "\nmistake selection rate:\n" << tables.mistake_text;
    log << "wrote summary.csv, summary.txt, mistake_table.csv, mistake_table.txt under " << results_dir << "\n";
    return tables;
}

}  // namespace alkit
