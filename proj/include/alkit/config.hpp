#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "alkit/dataset.hpp"
#include "alkit/loop.hpp"
#include "alkit/split.hpp"

namespace alkit {

struct DatasetSource {
    enum class Kind { kIdx, kCsv, kBlobs };
    Kind kind = Kind::kBlobs;
    std::string name;

    // idx
    std::string train_images, train_labels;
    std::string test_images, test_labels;  // optional official test split

    // csv
    std::string csv_path;
    bool csv_has_header = false;

    // blobs
    int num_classes = 10;
    std::vector<int> per_class;  // one entry per class
    int dim = 32;
    std::uint64_t centers_seed = 1;
    double noise_sigma = 3.0;
    std::uint64_t sample_seed = 2;
};

enum class SplitMode { kBalanced, kImbalanced };

struct ExperimentConfig {
    DatasetSource dataset;
    SplitMode split_mode = SplitMode::kBalanced;
    SplitSpec split;          // per-run seed is derived from the run seed
    ImbalanceSpec imbalance;  // used in imbalanced mode
    LoopConfig loop;          // strategy and seed are filled per job
    std::vector<std::string> strategies;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;  // empty: resolved from ALKIT_OUT_DIR or "results"
};

// Strict parse: unknown keys, out-of-range values and missing dataset files
// are reported as ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_file(const std::string& path);

nlohmann::json config_to_json(const ExperimentConfig& config);

struct LoadedData {
    Dataset dataset;
    int external_test_count = 0;  // trailing rows forming an official test set
};

LoadedData load_dataset(const DatasetSource& source);

// Split for a given run seed, honoring the configured mode.
Split build_split(const ExperimentConfig& config, const Dataset& dataset, int external_test_count,
                  std::uint64_t run_seed);

// step_size == 0 in the config means the protocol default: 10% of the
// initial training size, doubled to 20% in the imbalanced setting.
int resolve_step_size(const ExperimentConfig& config, int initial_train_size);

}  // namespace alkit
