#include "alkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "alkit/errors.hpp"

namespace alkit {

namespace {

using nlohmann::json;

json loop_config_to_json(const LoopConfig& cfg) {
    return {{"steps", cfg.steps},
            {"step_size", cfg.step_size},
            {"patience", cfg.early_stopping_patience},
            {"max_epochs", cfg.max_epochs},
            {"batch_size", cfg.batch_size},
            {"retrain_mode", cfg.retrain_mode == RetrainMode::kContinueWithOptimizerReset ? "continue" : "from_scratch"},
            {"strategy", cfg.strategy},
            {"hidden_dims", cfg.hidden_dims},
            {"dropout_rate", cfg.dropout_rate},
            {"adam",
             {{"learning_rate", cfg.adam.learning_rate},
              {"beta1", cfg.adam.beta1},
              {"beta2", cfg.adam.beta2},
              {"epsilon", cfg.adam.epsilon}}},
            {"strategy_params",
             {{"eta", cfg.strategy_params.ours.eta},
              {"inner_iterations", cfg.strategy_params.ours.inner_iterations},
              {"mc_passes", cfg.strategy_params.mc_passes},
              {"err_subset_size", cfg.strategy_params.err_subset_size},
              {"pool_subsample", cfg.strategy_params.pool_subsample}}},
            {"seed", cfg.seed}};
}

LoopConfig loop_config_from_json(const json& doc) {
    LoopConfig cfg;
    cfg.steps = doc.at("steps").get<int>();
    cfg.step_size = doc.at("step_size").get<int>();
    cfg.early_stopping_patience = doc.at("patience").get<int>();
    cfg.max_epochs = doc.at("max_epochs").get<int>();
    cfg.batch_size = doc.at("batch_size").get<int>();
    cfg.retrain_mode = doc.at("retrain_mode").get<std::string>() == "continue"
                           ? RetrainMode::kContinueWithOptimizerReset
                           : RetrainMode::kFromScratch;
    cfg.strategy = doc.at("strategy").get<std::string>();
    cfg.hidden_dims = doc.at("hidden_dims").get<std::vector<int>>();
    cfg.dropout_rate = doc.at("dropout_rate").get<double>();
    cfg.adam.learning_rate = doc.at("adam").at("learning_rate").get<double>();
    cfg.adam.beta1 = doc.at("adam").at("beta1").get<double>();
    cfg.adam.beta2 = doc.at("adam").at("beta2").get<double>();
    cfg.adam.epsilon = doc.at("adam").at("epsilon").get<double>();
    const json& sp = doc.at("strategy_params");
    cfg.strategy_params.ours.eta = sp.at("eta").get<double>();
    cfg.strategy_params.ours.inner_iterations = sp.at("inner_iterations").get<int>();
    cfg.strategy_params.mc_passes = sp.at("mc_passes").get<int>();
    cfg.strategy_params.err_subset_size = sp.at("err_subset_size").get<int>();
    cfg.strategy_params.pool_subsample = sp.at("pool_subsample").get<int>();
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    return cfg;
}

}  // namespace

json run_record_to_json(const RunRecord& record) {
    json steps = json::array();
    for (const StepRecord& s : record.steps) {
        json step = {{"step", s.step},
                     {"train_size", s.train_size},
                     {"test_accuracy", s.test_accuracy},
                     {"holdout_loss", s.holdout_loss},
                     {"selected_indices", s.selected_indices},
                     {"wall_time_ms", s.wall_time_ms}};
        if (s.mistake_selection_rate)
            step["mistake_rate"] = *s.mistake_selection_rate;
        else
            step["mistake_rate"] = nullptr;
        steps.push_back(std::move(step));
    }
    return {{"dataset", record.dataset_name}, {"strategy", record.strategy},   {"seed", record.seed},
            {"truncated", record.truncated},  {"config", loop_config_to_json(record.config)}, {"steps", steps}};
}

RunRecord run_record_from_json(const json& doc) {
    RunRecord record;
    try {
        record.dataset_name = doc.at("dataset").get<std::string>();
        record.strategy = doc.at("strategy").get<std::string>();
        record.seed = doc.at("seed").get<std::uint64_t>();
        record.truncated = doc.at("truncated").get<bool>();
        record.config = loop_config_from_json(doc.at("config"));
        for (const json& s : doc.at("steps")) {
            StepRecord step;
            step.step = s.at("step").get<int>();
            step.train_size = s.at("train_size").get<int>();
            step.test_accuracy = s.at("test_accuracy").get<double>();
            step.holdout_loss = s.at("holdout_loss").get<double>();
            if (!s.at("mistake_rate").is_null()) step.mistake_selection_rate = s.at("mistake_rate").get<double>();
            step.selected_indices = s.at("selected_indices").get<std::vector<int>>();
            step.wall_time_ms = s.at("wall_time_ms").get<std::int64_t>();
            record.steps.push_back(std::move(step));
        }
    } catch (const json::exception& e) {
        throw ParseError("malformed run record: " + std::string(e.what()));
    }
    return record;
}

std::string format_real(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

std::string results_csv_header() {
    return "dataset,strategy,seed,step,train_size,test_accuracy,holdout_loss,mistake_rate\n";
}

std::string results_csv_rows(const RunRecord& record) {
    std::string out;
    for (const StepRecord& s : record.steps) {
        out += record.dataset_name + "," + record.strategy + "," + std::to_string(record.seed) + "," +
               std::to_string(s.step) + "," + std::to_string(s.train_size) + "," +
               format_real(s.test_accuracy) + "," + format_real(s.holdout_loss) + ",";
        if (s.mistake_selection_rate) out += format_real(*s.mistake_selection_rate);
        out += "\n";
    }
    return out;
}

std::vector<RunRow> parse_results_csv(const std::string& content) {
    std::stringstream in(content);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("results CSV is empty");
    if (line != "dataset,strategy,seed,step,train_size,test_accuracy,holdout_loss,mistake_rate")
        throw ParseError("unexpected results CSV header: " + line);
    std::vector<RunRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != 8)
            throw ParseError("bad results CSV row at line " + std::to_string(line_no));
        RunRow row;
        row.dataset = cells[0];
        row.strategy = cells[1];
        row.seed = std::stoull(cells[2]);
        row.step = std::stoi(cells[3]);
        row.train_size = std::stoi(cells[4]);
        row.test_accuracy = std::stod(cells[5]);
        row.holdout_loss = std::stod(cells[6]);
        if (!cells[7].empty()) row.mistake_rate = std::stod(cells[7]);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

struct Samples {
    std::vector<double> accuracy;
    std::vector<double> mistakes;
    int train_size = 0;
};

std::pair<double, double> mean_std(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v / n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

ReportTables build_report(const std::vector<RunRow>& rows) {
    if (rows.empty()) throw ConfigError("no result rows to report");

    // (dataset, strategy, step) -> samples over seeds
    std::map<std::tuple<std::string, std::string, int>, Samples> groups;
    std::set<int> steps_seen;
    for (const RunRow& row : rows) {
        Samples& g = groups[{row.dataset, row.strategy, row.step}];
        g.accuracy.push_back(row.test_accuracy);
        if (row.mistake_rate) g.mistakes.push_back(*row.mistake_rate);
        g.train_size = row.train_size;
        steps_seen.insert(row.step);
    }

    ReportTables tables;
    tables.summary_csv =
        "dataset,strategy,step,train_size,runs,mean_test_accuracy,std_test_accuracy,mean_mistake_rate,std_mistake_rate\n";
    std::ostringstream text;
    text << pad("dataset", 12) << pad("strategy", 15) << pad("step", 6) << pad("train", 8) << pad("runs", 6)
         << pad("accuracy", 20) << pad("mistake rate", 20) << "\n";
    for (const auto& [key, g] : groups) {
        const auto& [dataset, strategy, step] = key;
        const auto [acc_mean, acc_std] = mean_std(g.accuracy);
        tables.summary_csv += dataset + "," + strategy + "," + std::to_string(step) + "," +
                              std::to_string(g.train_size) + "," + std::to_string(g.accuracy.size()) + "," +
                              format_real(acc_mean) + "," + format_real(acc_std) + ",";
        std::string mist = "-";
        if (!g.mistakes.empty()) {
            const auto [m_mean, m_std] = mean_std(g.mistakes);
            tables.summary_csv += format_real(m_mean) + "," + format_real(m_std);
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3f +/- %.3f", m_mean, m_std);
            mist = buf;
        } else {
            tables.summary_csv += ",";
        }
        tables.summary_csv += "\n";
        char acc[64];
        std::snprintf(acc, sizeof(acc), "%.3f +/- %.3f", acc_mean, acc_std);
        text << pad(dataset, 12) << pad(strategy, 15) << pad(std::to_string(step), 6)
             << pad(std::to_string(g.train_size), 8) << pad(std::to_string(g.accuracy.size()), 6) << pad(acc, 20)
             << pad(mist, 20) << "\n";
    }
    tables.summary_text = text.str();

    // mistake-rate table, strategies x steps {1,5,10} (or whatever exists)
    const int max_step = *steps_seen.rbegin();
    std::vector<int> table_steps;
    if (max_step >= 10)
        table_steps = {1, 5, 10};
    else
        for (int s : steps_seen)
            if (s >= 1) table_steps.push_back(s);

    std::set<std::pair<std::string, std::string>> series;
    for (const RunRow& row : rows) series.insert({row.dataset, row.strategy});

    std::ostringstream mcsv, mtext;
    mcsv << "dataset,strategy";
    mtext << pad("dataset", 12) << pad("strategy", 15);
    for (int s : table_steps) {
        mcsv << ",step_" << s;
        mtext << pad("step " + std::to_string(s), 10);
    }
    mcsv << "\n";
    mtext << "\n";
    for (const auto& [dataset, strategy] : series) {
        mcsv << dataset << "," << strategy;
        mtext << pad(dataset, 12) << pad(strategy, 15);
        for (int s : table_steps) {
            const auto it = groups.find({dataset, strategy, s});
            if (it == groups.end() || it->second.mistakes.empty()) {
                mcsv << ",";
                mtext << pad("-", 10);
            } else {
                const auto [m, sd] = mean_std(it->second.mistakes);
                (void)sd;
                mcsv << "," << format_real(m);
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * m);
                mtext << pad(buf, 10);
            }
        }
        mcsv << "\n";
        mtext << "\n";
    }
    tables.mistake_csv = mcsv.str();
    tables.mistake_text = mtext.str();
    return tables;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace alkit
