#include "alkit/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "alkit/errors.hpp"

namespace alkit {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
    for (const auto& item : obj.items())
        if (allowed.count(item.key()) == 0)
            throw ConfigError("unknown key '" + item.key() + "' in '" + where + "'");
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + key + "'");
    }
}

std::string require_string(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing '" + key + "' in '" + where + "'");
    if (!obj.at(key).is_string()) throw ConfigError("'" + key + "' must be a string");
    return obj.at(key).get<std::string>();
}

void require_file(const std::string& path, const std::string& field) {
    if (!std::filesystem::exists(path)) throw ConfigError("file for '" + field + "' does not exist: " + path);
}

DatasetSource parse_dataset(const json& obj) {
    require_keys(obj, "dataset",
                 {"type", "name", "train_images", "train_labels", "test_images", "test_labels", "path",
                  "has_header", "num_classes", "per_class", "dim", "centers_seed", "noise_sigma", "sample_seed",
                  "test_fraction"});
    DatasetSource src;
    const std::string type = require_string(obj, "type", "dataset");
    if (type == "idx") {
        src.kind = DatasetSource::Kind::kIdx;
        src.train_images = require_string(obj, "train_images", "dataset");
        src.train_labels = require_string(obj, "train_labels", "dataset");
        src.test_images = get_or<std::string>(obj, "test_images", "");
        src.test_labels = get_or<std::string>(obj, "test_labels", "");
        require_file(src.train_images, "train_images");
        require_file(src.train_labels, "train_labels");
        if (src.test_images.empty() != src.test_labels.empty())
            throw ConfigError("test_images and test_labels must be given together");
        if (!src.test_images.empty()) {
            require_file(src.test_images, "test_images");
            require_file(src.test_labels, "test_labels");
        }
        src.name = get_or<std::string>(obj, "name", "idx");
    } else if (type == "csv") {
        src.kind = DatasetSource::Kind::kCsv;
        src.csv_path = require_string(obj, "path", "dataset");
        require_file(src.csv_path, "path");
        src.csv_has_header = get_or<bool>(obj, "has_header", false);
        src.name = get_or<std::string>(obj, "name", "csv");
    } else if (type == "blobs") {
        src.kind = DatasetSource::Kind::kBlobs;
        src.num_classes = get_or<int>(obj, "num_classes", 10);
        if (src.num_classes < 2) throw ConfigError("'num_classes' must be >= 2");
        if (obj.contains("per_class") && obj.at("per_class").is_array())
            src.per_class = obj.at("per_class").get<std::vector<int>>();
        else
            src.per_class.assign(static_cast<std::size_t>(src.num_classes), get_or<int>(obj, "per_class", 600));
        if (static_cast<int>(src.per_class.size()) != src.num_classes)
            throw ConfigError("'per_class' must list one count per class");
        src.dim = get_or<int>(obj, "dim", 32);
        src.centers_seed = get_or<std::uint64_t>(obj, "centers_seed", 1);
        src.noise_sigma = get_or<double>(obj, "noise_sigma", 3.0);
        src.sample_seed = get_or<std::uint64_t>(obj, "sample_seed", 2);
        src.name = get_or<std::string>(obj, "name", "blobs");
    } else {
        throw ConfigError("dataset 'type' must be one of: idx, csv, blobs");
    }
    return src;
}

ImbalanceSpec parse_imbalance(const json& obj) {
    require_keys(obj, "split.imbalance",
                 {"minority_fraction", "minority_classes", "minority_class_count", "doubled_initial",
                  "holdout_to_initial_ratio"});
    ImbalanceSpec imb;
    imb.minority_fraction = get_or<double>(obj, "minority_fraction", 0.1);
    if (imb.minority_fraction <= 0.0 || imb.minority_fraction > 1.0)
        throw ConfigError("'minority_fraction' must be in (0, 1]");
    imb.minority_class_count = get_or<int>(obj, "minority_class_count", -1);
    imb.doubled_initial = get_or<bool>(obj, "doubled_initial", true);
    imb.holdout_to_initial_ratio = get_or<double>(obj, "holdout_to_initial_ratio", 0.2);
    if (imb.holdout_to_initial_ratio <= 0.0) throw ConfigError("'holdout_to_initial_ratio' must be > 0");
    if (obj.contains("minority_classes")) {
        const json& mc = obj.at("minority_classes");
        if (mc.is_string()) {
            const std::string s = mc.get<std::string>();
            if (s == "lower_half")
                imb.choice = MinorityChoice::kLowerHalf;
            else if (s == "seeded")
                imb.choice = MinorityChoice::kSeededRandom;
            else
                throw ConfigError("'minority_classes' must be \"lower_half\", \"seeded\" or a class list");
        } else if (mc.is_array()) {
            imb.choice = MinorityChoice::kExplicit;
            imb.minority_classes = mc.get<std::vector<int>>();
        } else {
            throw ConfigError("'minority_classes' must be \"lower_half\", \"seeded\" or a class list");
        }
    }
    return imb;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    require_keys(doc, "config",
                 {"dataset", "split", "loop", "model", "strategy_params", "strategies", "seeds", "output_dir"});
    if (!doc.contains("dataset")) throw ConfigError("missing 'dataset' section");
    ExperimentConfig config;
    config.dataset = parse_dataset(doc.at("dataset"));

    const json split = doc.contains("split") ? doc.at("split") : json::object();
    require_keys(split, "split",
                 {"mode", "initial_per_class", "holdout_per_class", "test_fraction", "imbalance"});
    const std::string mode = get_or<std::string>(split, "mode", "balanced");
    if (mode == "balanced")
        config.split_mode = SplitMode::kBalanced;
    else if (mode == "imbalanced")
        config.split_mode = SplitMode::kImbalanced;
    else
        throw ConfigError("split 'mode' must be 'balanced' or 'imbalanced'");
    config.split.initial_per_class = get_or<int>(split, "initial_per_class", 5);
    if (config.split.initial_per_class < 1) throw ConfigError("'initial_per_class' must be >= 1");
    config.split.holdout_per_class = get_or<int>(split, "holdout_per_class", -1);
    config.split.test_fraction = get_or<double>(split, "test_fraction", 0.2);
    if (config.split.test_fraction < 0.0 || config.split.test_fraction >= 1.0)
        throw ConfigError("'test_fraction' must be in [0, 1)");
    if (split.contains("imbalance")) config.imbalance = parse_imbalance(split.at("imbalance"));

    const json loop = doc.contains("loop") ? doc.at("loop") : json::object();
    require_keys(loop, "loop", {"steps", "step_size", "patience", "max_epochs", "batch_size", "retrain_mode"});
    config.loop.steps = get_or<int>(loop, "steps", 10);
    if (config.loop.steps < 0) throw ConfigError("'steps' must be >= 0");
    config.loop.step_size = get_or<int>(loop, "step_size", 0);
    if (config.loop.step_size < 0) throw ConfigError("'step_size' must be >= 0 (0 = protocol default)");
    config.loop.early_stopping_patience = get_or<int>(loop, "patience", 10);
    if (config.loop.early_stopping_patience < 0) throw ConfigError("'patience' must be >= 0");
    config.loop.max_epochs = get_or<int>(loop, "max_epochs", 200);
    if (config.loop.max_epochs < 1) throw ConfigError("'max_epochs' must be >= 1");
    config.loop.batch_size = get_or<int>(loop, "batch_size", 32);
    if (config.loop.batch_size < 1) throw ConfigError("'batch_size' must be >= 1");
    const std::string retrain = get_or<std::string>(loop, "retrain_mode", "continue");
    if (retrain == "continue")
        config.loop.retrain_mode = RetrainMode::kContinueWithOptimizerReset;
    else if (retrain == "from_scratch")
        config.loop.retrain_mode = RetrainMode::kFromScratch;
    else
        throw ConfigError("'retrain_mode' must be 'continue' or 'from_scratch'");

    const json model = doc.contains("model") ? doc.at("model") : json::object();
    require_keys(model, "model", {"hidden_dims", "dropout_rate", "adam"});
    config.loop.hidden_dims = get_or<std::vector<int>>(model, "hidden_dims", {256});
    for (int h : config.loop.hidden_dims)
        if (h < 1) throw ConfigError("'hidden_dims' entries must be >= 1");
    config.loop.dropout_rate = get_or<double>(model, "dropout_rate", 0.25);
    if (config.loop.dropout_rate < 0.0 || config.loop.dropout_rate >= 1.0)
        throw ConfigError("'dropout_rate' must be in [0, 1)");
    const json adam = model.contains("adam") ? model.at("adam") : json::object();
    require_keys(adam, "model.adam", {"learning_rate", "beta1", "beta2", "epsilon"});
    config.loop.adam.learning_rate = get_or<double>(adam, "learning_rate", 1e-3);
    config.loop.adam.beta1 = get_or<double>(adam, "beta1", 0.9);
    config.loop.adam.beta2 = get_or<double>(adam, "beta2", 0.999);
    config.loop.adam.epsilon = get_or<double>(adam, "epsilon", 1e-8);
    if (config.loop.adam.learning_rate <= 0.0) throw ConfigError("'learning_rate' must be > 0");

    const json sp = doc.contains("strategy_params") ? doc.at("strategy_params") : json::object();
    require_keys(sp, "strategy_params",
                 {"eta", "inner_iterations", "mc_passes", "err_subset_size", "pool_subsample"});
    config.loop.strategy_params.ours.eta = get_or<double>(sp, "eta", 1e-3);
    if (config.loop.strategy_params.ours.eta < 0.0) throw ConfigError("'eta' must be >= 0");
    config.loop.strategy_params.ours.inner_iterations = get_or<int>(sp, "inner_iterations", 3);
    if (config.loop.strategy_params.ours.inner_iterations < 0)
        throw ConfigError("'inner_iterations' must be >= 0");
    config.loop.strategy_params.mc_passes = get_or<int>(sp, "mc_passes", 25);
    if (config.loop.strategy_params.mc_passes < 1) throw ConfigError("'mc_passes' must be >= 1");
    config.loop.strategy_params.err_subset_size = get_or<int>(sp, "err_subset_size", 1000);
    if (config.loop.strategy_params.err_subset_size < 1) throw ConfigError("'err_subset_size' must be >= 1");
    config.loop.strategy_params.pool_subsample = get_or<int>(sp, "pool_subsample", 0);
    if (config.loop.strategy_params.pool_subsample < 0) throw ConfigError("'pool_subsample' must be >= 0");

    if (!doc.contains("strategies")) throw ConfigError("missing 'strategies' list");
    config.strategies = doc.at("strategies").get<std::vector<std::string>>();
    if (config.strategies.empty()) throw ConfigError("'strategies' must name at least one strategy");
    for (const std::string& id : config.strategies) {
        if (std::find(strategy_ids().begin(), strategy_ids().end(), id) == strategy_ids().end()) {
            std::string msg = "unknown strategy '" + id + "'; valid ids:";
            for (const std::string& s : strategy_ids()) msg += " " + s;
            throw ConfigError(msg);
        }
    }

    if (!doc.contains("seeds")) throw ConfigError("missing 'seeds' list");
    config.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    if (config.seeds.empty()) throw ConfigError("'seeds' must list at least one seed");

    config.output_dir = get_or<std::string>(doc, "output_dir", "");
    return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc);
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
    json doc;
    json& ds = doc["dataset"];
    switch (config.dataset.kind) {
        case DatasetSource::Kind::kIdx:
            ds["type"] = "idx";
            ds["train_images"] = config.dataset.train_images;
            ds["train_labels"] = config.dataset.train_labels;
            if (!config.dataset.test_images.empty()) {
                ds["test_images"] = config.dataset.test_images;
                ds["test_labels"] = config.dataset.test_labels;
            }
            break;
        case DatasetSource::Kind::kCsv:
            ds["type"] = "csv";
            ds["path"] = config.dataset.csv_path;
            ds["has_header"] = config.dataset.csv_has_header;
            break;
        case DatasetSource::Kind::kBlobs:
            ds["type"] = "blobs";
            ds["num_classes"] = config.dataset.num_classes;
            ds["per_class"] = config.dataset.per_class;
            ds["dim"] = config.dataset.dim;
            ds["centers_seed"] = config.dataset.centers_seed;
            ds["noise_sigma"] = config.dataset.noise_sigma;
            ds["sample_seed"] = config.dataset.sample_seed;
            break;
    }
    ds["name"] = config.dataset.name;

    json& split = doc["split"];
    split["mode"] = config.split_mode == SplitMode::kBalanced ? "balanced" : "imbalanced";
    split["initial_per_class"] = config.split.initial_per_class;
    split["holdout_per_class"] = config.split.holdout_per_class;
    split["test_fraction"] = config.split.test_fraction;
    if (config.split_mode == SplitMode::kImbalanced) {
        json& imb = split["imbalance"];
        imb["minority_fraction"] = config.imbalance.minority_fraction;
        switch (config.imbalance.choice) {
            case MinorityChoice::kLowerHalf: imb["minority_classes"] = "lower_half"; break;
            case MinorityChoice::kSeededRandom: imb["minority_classes"] = "seeded"; break;
            case MinorityChoice::kExplicit: imb["minority_classes"] = config.imbalance.minority_classes; break;
        }
        imb["minority_class_count"] = config.imbalance.minority_class_count;
        imb["doubled_initial"] = config.imbalance.doubled_initial;
        imb["holdout_to_initial_ratio"] = config.imbalance.holdout_to_initial_ratio;
    }

    json& loop = doc["loop"];
    loop["steps"] = config.loop.steps;
    loop["step_size"] = config.loop.step_size;
    loop["patience"] = config.loop.early_stopping_patience;
    loop["max_epochs"] = config.loop.max_epochs;
    loop["batch_size"] = config.loop.batch_size;
    loop["retrain_mode"] =
        config.loop.retrain_mode == RetrainMode::kContinueWithOptimizerReset ? "continue" : "from_scratch";

    json& model = doc["model"];
    model["hidden_dims"] = config.loop.hidden_dims;
    model["dropout_rate"] = config.loop.dropout_rate;
    model["adam"] = {{"learning_rate", config.loop.adam.learning_rate},
                     {"beta1", config.loop.adam.beta1},
                     {"beta2", config.loop.adam.beta2},
                     {"epsilon", config.loop.adam.epsilon}};

    doc["strategy_params"] = {{"eta", config.loop.strategy_params.ours.eta},
                              {"inner_iterations", config.loop.strategy_params.ours.inner_iterations},
                              {"mc_passes", config.loop.strategy_params.mc_passes},
                              {"err_subset_size", config.loop.strategy_params.err_subset_size},
                              {"pool_subsample", config.loop.strategy_params.pool_subsample}};
    doc["strategies"] = config.strategies;
    doc["seeds"] = config.seeds;
    doc["output_dir"] = config.output_dir;
    return doc;
}

LoadedData load_dataset(const DatasetSource& source) {
    LoadedData out;
    switch (source.kind) {
        case DatasetSource::Kind::kIdx: {
            Dataset train = load_idx(source.train_images, source.train_labels);
            if (!source.test_images.empty()) {
                const Dataset test = load_idx(source.test_images, source.test_labels);
                out.external_test_count = test.size();
                out.dataset = concat(train, test);
            } else {
                out.dataset = std::move(train);
            }
            break;
        }
        case DatasetSource::Kind::kCsv:
            out.dataset = load_csv(source.csv_path, source.csv_has_header);
            break;
        case DatasetSource::Kind::kBlobs:
            out.dataset = make_blobs(source.num_classes, source.per_class, source.dim, source.centers_seed,
                                     source.noise_sigma, source.sample_seed);
            break;
    }
    out.dataset.name = source.name;
    return out;
}

Split build_split(const ExperimentConfig& config, const Dataset& dataset, int external_test_count,
                  std::uint64_t run_seed) {
    SplitSpec spec = config.split;
    spec.external_test_count = external_test_count;
    spec.seed = run_seed;
    if (config.split_mode == SplitMode::kImbalanced)
        return make_imbalanced_split(dataset, spec, config.imbalance);
    return make_split(dataset, spec);
}

int resolve_step_size(const ExperimentConfig& config, int initial_train_size) {
    if (config.loop.step_size > 0) return config.loop.step_size;
    const double fraction = config.split_mode == SplitMode::kImbalanced ? 0.2 : 0.1;
    return std::max(1, static_cast<int>(std::lround(fraction * initial_train_size)));
}

}  // namespace alkit
