#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "alkit/config.hpp"
#include "alkit/errors.hpp"
#include "alkit/experiment.hpp"
#include "alkit/report.hpp"
#include "testutil.hpp"

using namespace alkit;
using nlohmann::json;

namespace {

json minimal_config() {
    return json{{"dataset", {{"type", "blobs"}, {"num_classes", 3}, {"per_class", 40}, {"dim", 4},
                             {"centers_seed", 7}, {"noise_sigma", 2.5}, {"sample_seed", 8}}},
                {"split", {{"mode", "balanced"}, {"initial_per_class", 3}, {"test_fraction", 0.2}}},
                {"loop", {{"steps", 2}, {"step_size", 3}, {"max_epochs", 10}, {"patience", 2}}},
                {"model", {{"hidden_dims", {8}}}},
                {"strategies", {"random"}},
                {"seeds", {1}}};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ALKIT_BIN_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("parse_config fills documented defaults") {
    const ExperimentConfig config = parse_config(minimal_config());
    CHECK(config.loop.early_stopping_patience == 2);
    CHECK(config.loop.batch_size == 32);
    CHECK(config.loop.dropout_rate == 0.25);
    CHECK(config.loop.adam.learning_rate == 1e-3);
    CHECK(config.loop.strategy_params.ours.eta == 1e-3);
    CHECK(config.loop.strategy_params.ours.inner_iterations == 3);
    CHECK(config.loop.strategy_params.mc_passes == 25);
    CHECK(config.loop.retrain_mode == RetrainMode::kContinueWithOptimizerReset);
    CHECK(config.split_mode == SplitMode::kBalanced);
    CHECK(config.strategies == std::vector<std::string>{"random"});
}

TEST_CASE("parse_config rejects malformed documents with named fields") {
    SUBCASE("unknown top-level key") {
        json doc = minimal_config();
        doc["typo_section"] = 1;
        try {
            parse_config(doc);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("typo_section") != std::string::npos);
        }
    }
    SUBCASE("unknown strategy lists the valid ids") {
        json doc = minimal_config();
        doc["strategies"] = {"margin"};
        try {
            parse_config(doc);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            CHECK(what.find("margin") != std::string::npos);
            CHECK(what.find("ours_app") != std::string::npos);
            CHECK(what.find("badge") != std::string::npos);
        }
    }
    SUBCASE("missing dataset") {
        json doc = minimal_config();
        doc.erase("dataset");
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
    }
    SUBCASE("out-of-range values name the field") {
        json doc = minimal_config();
        doc["split"]["test_fraction"] = 1.5;
        try {
            parse_config(doc);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("test_fraction") != std::string::npos);
        }
        doc = minimal_config();
        doc["model"]["dropout_rate"] = 1.0;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc = minimal_config();
        doc["seeds"] = json::array();
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
    }
    SUBCASE("referenced dataset paths must exist") {
        json doc = minimal_config();
        doc["dataset"] = {{"type", "csv"}, {"path", "/nonexistent/file.csv"}};
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
    }
}

TEST_CASE("resolve_step_size applies the protocol defaults") {
    ExperimentConfig config = parse_config(minimal_config());
    config.loop.step_size = 0;
    CHECK(resolve_step_size(config, 50) == 5);  // 10% balanced
    config.split_mode = SplitMode::kImbalanced;
    CHECK(resolve_step_size(config, 50) == 10);  // 20% imbalanced
    config.loop.step_size = 7;
    CHECK(resolve_step_size(config, 50) == 7);  // explicit wins
}

TEST_CASE("run record JSON round-trips without loss") {
    RunRecord record;
    record.dataset_name = "blobs";
    record.strategy = "ours";
    record.seed = 17;
    record.truncated = true;
    record.config.steps = 3;
    record.config.strategy = "ours";
    record.config.seed = 17;
    record.config.strategy_params.ours.eta = 0.00125;
    record.steps.push_back({0, 9, 0.123456789123, 1.5, std::nullopt, {}, 12});
    record.steps.push_back({1, 12, 0.75, 0.25, 0.625, {4, 2, 9}, 34});

    const RunRecord back = run_record_from_json(run_record_to_json(record));
    CHECK(same_results(record, back));
    CHECK(back.steps[0].test_accuracy == record.steps[0].test_accuracy);  // full precision
    CHECK(back.config.strategy_params.ours.eta == 0.00125);
    CHECK(back.steps[1].selected_indices == std::vector<int>{4, 2, 9});
}

TEST_CASE("results CSV schema is stable and bit-exact") {
    CHECK(results_csv_header() == "dataset,strategy,seed,step,train_size,test_accuracy,holdout_loss,mistake_rate\n");
    CHECK(format_real(0.5) == "0.500000");
    CHECK(format_real(1.0 / 3.0) == "0.333333");

    RunRecord record;
    record.dataset_name = "blobs";
    record.strategy = "random";
    record.seed = 3;
    record.steps.push_back({0, 9, 0.5, 1.25, std::nullopt, {}, 1});
    record.steps.push_back({1, 12, 0.625, 1.0, 0.5, {1}, 2});
    const std::string rows = results_csv_rows(record);
    CHECK(rows ==
          "blobs,random,3,0,9,0.500000,1.250000,\n"
          "blobs,random,3,1,12,0.625000,1.000000,0.500000\n");

    const std::vector<RunRow> parsed = parse_results_csv(results_csv_header() + rows);
    REQUIRE(parsed.size() == 2);
    CHECK_FALSE(parsed[0].mistake_rate.has_value());
    CHECK(parsed[1].mistake_rate.has_value());
    CHECK(parsed[1].test_accuracy == 0.625);
}

TEST_CASE("build_report aggregates rows into the summary and mistake tables") {
    std::vector<RunRow> rows;
    for (std::uint64_t seed : {0, 1}) {
        for (int step = 0; step <= 10; ++step) {
            RunRow row;
            row.dataset = "blobs";
            row.strategy = seed == 0 ? "ours" : "ours";
            row.seed = seed;
            row.step = step;
            row.train_size = 9 + 3 * step;
            row.test_accuracy = 0.5 + 0.01 * step + 0.1 * static_cast<double>(seed);
            row.holdout_loss = 1.0;
            if (step > 0) row.mistake_rate = 0.9 - 0.05 * step;
            rows.push_back(row);
        }
    }
    const ReportTables tables = build_report(rows);
    CHECK(tables.summary_csv.find("blobs,ours,0,9,2,0.550000,0.070711") != std::string::npos);
    // Table-1 layout: steps 1, 5 and 10 when the run reaches step 10
    CHECK(tables.mistake_csv.find("step_1,step_5,step_10") != std::string::npos);
    CHECK(tables.mistake_text.find("85.0%") != std::string::npos);  // step 1
    CHECK(tables.mistake_text.find("65.0%") != std::string::npos);  // step 5
    CHECK(tables.mistake_text.find("40.0%") != std::string::npos);  // step 10

    // pure function of the rows
    const ReportTables again = build_report(rows);
    CHECK(again.summary_csv == tables.summary_csv);
    CHECK(again.mistake_text == tables.mistake_text);
}

TEST_CASE("run_experiment writes records, CSV and resolved config deterministically") {
    const auto dir = testutil::temp_dir("exp");
    json doc = minimal_config();
    doc["strategies"] = {"random", "entropy"};
    doc["seeds"] = {1, 2};
    doc["output_dir"] = (dir / "out").string();
    const ExperimentConfig config = parse_config(doc);

    std::ostringstream log;
    run_experiment(config, 1, false, log);
    CHECK(std::filesystem::exists(dir / "out" / "results.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "config_resolved.json"));
    int run_files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "out" / "runs")) {
        ++run_files;
        (void)entry;
    }
    CHECK(run_files == 4);

    const std::string first = read_file(dir / "out" / "results.csv");
    // 4 runs x (2 steps + baseline) data rows + header
    CHECK(std::count(first.begin(), first.end(), '\n') == 13);

    // second execution, same config: byte-identical CSV
    std::ostringstream log2;
    run_experiment(config, 2, false, log2);
    CHECK(read_file(dir / "out" / "results.csv") == first);

    // report from the CSV and from the JSON records agree
    const ReportTables from_csv = report_results_dir((dir / "out").string(), log2);
    std::filesystem::remove(dir / "out" / "results.csv");
    const ReportTables from_json = report_results_dir((dir / "out").string(), log2);
    CHECK(from_csv.summary_csv == from_json.summary_csv);
    CHECK(from_csv.mistake_csv == from_json.mistake_csv);
    CHECK(std::filesystem::exists(dir / "out" / "summary.txt"));
}

TEST_CASE("cli binary: exit codes and artifacts") {
    const auto dir = testutil::temp_dir("cli");
    {
        std::ofstream out(dir / "config.json");
        json doc = minimal_config();
        doc["output_dir"] = (dir / "results").string();
        out << doc.dump(2);
    }
    SUBCASE("run succeeds and writes results") {
        CHECK(run_cli("run --config " + (dir / "config.json").string()) == 0);
        CHECK(std::filesystem::exists(dir / "results" / "results.csv"));
        CHECK(run_cli("report --dir " + (dir / "results").string()) == 0);
        CHECK(std::filesystem::exists(dir / "results" / "mistake_table.txt"));
    }
    SUBCASE("sweep with overridden seeds honors the flags") {
        CHECK(run_cli("sweep --config " + (dir / "config.json").string() + " --workers 2 --seed 5 --seed 6 --out " +
                      (dir / "sw").string()) == 0);
        const std::string csv = read_file(dir / "sw" / "results.csv");
        CHECK(csv.find("random,5,") != std::string::npos);
        CHECK(csv.find("random,6,") != std::string::npos);
        CHECK(csv.find("random,1,") == std::string::npos);
    }
    SUBCASE("validation failures exit with code 1") {
        CHECK(run_cli("run --config /nonexistent.json") == 1);
        std::ofstream bad(dir / "bad.json");
        bad << "{\"dataset\": {\"type\": \"blobs\"}, \"strategies\": [\"nope\"], \"seeds\": [1]}";
        bad.close();
        CHECK(run_cli("run --config " + (dir / "bad.json").string()) == 1);
        CHECK(run_cli("report --dir " + (dir / "empty_missing").string()) == 1);
    }
    SUBCASE("ALKIT_OUT_DIR provides the default output directory") {
        std::ofstream out(dir / "noout.json");
        json doc = minimal_config();
        out << doc.dump(2);
        out.close();
        const std::string cmd = "cd " + dir.string() + " && ALKIT_OUT_DIR=" + (dir / "envout").string() + " " +
                                std::string(ALKIT_BIN_PATH) + " run --config " + (dir / "noout.json").string() +
                                " > /dev/null 2>&1";
        CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
        CHECK(std::filesystem::exists(dir / "envout" / "results.csv"));
    }
}
