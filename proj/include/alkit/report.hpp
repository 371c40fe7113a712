#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alkit/loop.hpp"

namespace alkit {

// One results-CSV data row. Reals carry 6 fixed decimals; a missing mistake
// rate (step 0) is an empty field.
struct RunRow {
    std::string dataset;
    std::string strategy;
    std::uint64_t seed = 0;
    int step = 0;
    int train_size = 0;
    double test_accuracy = 0.0;
    double holdout_loss = 0.0;
    std::optional<double> mistake_rate;
};

nlohmann::json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& doc);

std::string format_real(double value);  // fixed notation, 6 decimals

std::string results_csv_header();
std::string results_csv_rows(const RunRecord& record);
std::vector<RunRow> parse_results_csv(const std::string& content);

struct ReportTables {
    std::string summary_csv;
    std::string summary_text;
    std::string mistake_csv;
    std::string mistake_text;
};

// Per-(dataset, strategy, step) mean and std of accuracy and mistake rate,
// plus a strategies-by-steps mistake table over steps {1, 5, 10} when the
// run is that long.
ReportTables build_report(const std::vector<RunRow>& rows);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace alkit
