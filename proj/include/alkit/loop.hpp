#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "alkit/dataset.hpp"
#include "alkit/optim.hpp"
#include "alkit/split.hpp"
#include "alkit/strategies.hpp"

namespace alkit {

enum class RetrainMode { kContinueWithOptimizerReset, kFromScratch };

struct LoopConfig {
    int steps = 10;      // S annotation rounds after the initial training
    int step_size = 1;   // K samples annotated per round
    int early_stopping_patience = 10;
    int max_epochs = 200;
    int batch_size = 32;  // capped at the current training set size
    RetrainMode retrain_mode = RetrainMode::kContinueWithOptimizerReset;
    std::string strategy = "random";
    StrategyParams strategy_params;
    std::vector<int> hidden_dims = {256};
    double dropout_rate = 0.25;
    AdamConfig adam;
    std::uint64_t seed = 0;
};

struct StepRecord {
    int step = 0;
    int train_size = 0;
    double test_accuracy = 0.0;
    double holdout_loss = 0.0;  // mean over the holdout set
    std::optional<double> mistake_selection_rate;  // absent at step 0
    std::vector<int> selected_indices;             // dataset indices, selection order
    std::int64_t wall_time_ms = 0;
};

struct RunRecord {
    std::string dataset_name;
    std::string strategy;
    std::uint64_t seed = 0;
    LoopConfig config;
    bool truncated = false;  // pool ran out before all steps completed
    std::vector<StepRecord> steps;
};

struct TrainResult {
    int epochs_used = 0;
    double best_holdout_loss = 0.0;
};

// Mini-batch Adam until the holdout loss stops improving for `patience`
// epochs (or max_epochs); parameters revert to the best-holdout epoch.
TrainResult train_to_convergence(MlpModel& model, OptimizerState& optimizer, const Matrix& train_features,
                                 const std::vector<int>& train_labels, const Matrix& holdout_features,
                                 const std::vector<int>& holdout_labels, const LoopConfig& cfg, Rng& rng);

// Strategy invocation for one step. The context handed to the strategy holds
// features only; pool labels stay with the loop. Returns dataset indices.
std::vector<int> select_candidates(const Dataset& dataset, const Split& split, const ModelSnapshot& snapshot,
                                   const LoopConfig& cfg, std::uint64_t step_seed);

// Fraction of selected samples whose snapshot prediction differs from the
// true label, judged before annotation; absent for an empty selection.
std::optional<double> mistake_selection_rate(const ModelSnapshot& snapshot, const Dataset& dataset,
                                             const std::vector<int>& selected_indices);

using StepCallback = std::function<void(const StepRecord&)>;

RunRecord run_active_learning(const Dataset& dataset, const Split& split, const LoopConfig& cfg,
                              const StepCallback& on_step = {});

struct StepAggregate {
    int step = 0;
    int runs = 0;
    int train_size = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::optional<double> mean_mistake_rate;
    std::optional<double> std_mistake_rate;
};

struct AggregateResult {
    std::vector<StepAggregate> steps;
    bool mixed_step_counts = false;  // aggregated over the common prefix
    bool single_run = false;         // std devs are 0 by convention
};

// Per-step mean and unbiased standard deviation across runs.
AggregateResult aggregate_runs(const std::vector<RunRecord>& records);

// Data-field equality, ignoring wall-clock times.
bool same_results(const RunRecord& a, const RunRecord& b);

}  // namespace alkit
