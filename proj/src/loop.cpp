#include "alkit/loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "alkit/errors.hpp"

namespace alkit {

namespace {

constexpr std::uint64_t kInitTag = 0x494e4954;
constexpr std::uint64_t kTrainTag = 0x5452414e;
constexpr std::uint64_t kStrategyTag = 0x53545241;

double mean_holdout_loss(const MlpModel& model, const Matrix& features, const std::vector<int>& labels) {
    const ForwardResult fwd = forward(model, features, ForwardMode::kEval);
    return softmax_xent(fwd.logits, labels).mean_loss;
}

std::vector<int> gather_labels(const Dataset& dataset, const std::vector<int>& indices) {
    std::vector<int> out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i)
        out[i] = dataset.labels[static_cast<std::size_t>(indices[i])];
    return out;
}

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

TrainResult train_to_convergence(MlpModel& model, OptimizerState& optimizer, const Matrix& train_features,
                                 const std::vector<int>& train_labels, const Matrix& holdout_features,
                                 const std::vector<int>& holdout_labels, const LoopConfig& cfg, Rng& rng) {
    const int n = train_features.rows();
    if (n == 0) throw TrainingError("training set is empty");
    if (cfg.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    const int batch = std::max(1, std::min(cfg.batch_size, n));

    MlpModel best = model;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_epoch = 0;

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    int epoch = 0;
    for (epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (int start = 0; start < n; start += batch) {
            const int stop = std::min(n, start + batch);
            std::vector<int> rows(order.begin() + start, order.begin() + stop);
            const Matrix x = gather_rows(train_features, rows);
            std::vector<int> y(static_cast<std::size_t>(stop - start));
            for (int i = start; i < stop; ++i)
                y[static_cast<std::size_t>(i - start)] = train_labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];

            const ForwardResult fwd = forward(model, x, ForwardMode::kTrainDropout, &rng);
            const Gradients grads = backward(model, fwd.cache, y, GradScope::kAllLayers);
            adam_step(model, grads, optimizer);
        }
        const double loss = mean_holdout_loss(model, holdout_features, holdout_labels);
        if (!std::isfinite(loss))
            throw TrainingError("training diverged (non-finite holdout loss) at epoch " + std::to_string(epoch));
        if (loss < best_loss) {
            best_loss = loss;
            best = model;
            best_epoch = epoch;
        }
        if (epoch - best_epoch >= cfg.early_stopping_patience) break;
    }
    model = best;
    return {std::min(epoch, cfg.max_epochs), best_loss};
}

std::vector<int> select_candidates(const Dataset& dataset, const Split& split, const ModelSnapshot& snapshot,
                                   const LoopConfig& cfg, std::uint64_t step_seed) {
    const Matrix pool_features = gather_rows(dataset.features, split.pool_idx);
    Matrix train_features;
    std::optional<HoldoutCache> holdout;
    if (cfg.strategy == "coreset") train_features = gather_rows(dataset.features, split.train_idx);
    if (strategy_needs_holdout(cfg.strategy)) {
        holdout.emplace(snapshot, gather_rows(dataset.features, split.holdout_idx),
                        gather_labels(dataset, split.holdout_idx));
    }
    SelectionContext ctx{snapshot, pool_features, cfg.strategy == "coreset" ? &train_features : nullptr,
                         holdout ? &*holdout : nullptr, step_seed};
    std::vector<int> positions = select_with_strategy(cfg.strategy, ctx, cfg.step_size, cfg.strategy_params);
    std::vector<int> selected(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i)
        selected[i] = split.pool_idx[static_cast<std::size_t>(positions[i])];
    return selected;
}

std::optional<double> mistake_selection_rate(const ModelSnapshot& snapshot, const Dataset& dataset,
                                             const std::vector<int>& selected_indices) {
    if (selected_indices.empty()) return std::nullopt;
    const Matrix features = gather_rows(dataset.features, selected_indices);
    const std::vector<int> predicted = argmax_rows(forward(snapshot.model(), features, ForwardMode::kEval).logits);
    int wrong = 0;
    for (std::size_t i = 0; i < selected_indices.size(); ++i)
        if (predicted[i] != dataset.labels[static_cast<std::size_t>(selected_indices[i])]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(selected_indices.size());
}

RunRecord run_active_learning(const Dataset& dataset, const Split& split, const LoopConfig& cfg,
                              const StepCallback& on_step) {
    if (std::find(strategy_ids().begin(), strategy_ids().end(), cfg.strategy) == strategy_ids().end())
        throw ConfigError("unknown strategy '" + cfg.strategy + "'");
    if (cfg.steps < 0 || cfg.step_size < 1) throw ConfigError("loop needs steps >= 0 and step_size >= 1");
    dataset.validate();
    validate_split(split, dataset.size());

    RunRecord record;
    record.dataset_name = dataset.name;
    record.strategy = cfg.strategy;
    record.seed = cfg.seed;
    record.config = cfg;

    const Matrix holdout_features = gather_rows(dataset.features, split.holdout_idx);
    const std::vector<int> holdout_labels = gather_labels(dataset, split.holdout_idx);
    const Matrix test_features = gather_rows(dataset.features, split.test_idx);
    const std::vector<int> test_labels = gather_labels(dataset, split.test_idx);

    MlpModel model(dataset.dim(), cfg.hidden_dims, dataset.num_classes, cfg.dropout_rate,
                   derive_seed(cfg.seed, kInitTag));
    OptimizerState optimizer(model, cfg.adam);

    Split current = split;
    const auto train_and_record = [&](int step, std::optional<double> mistake_rate,
                                      std::vector<int> selected, std::chrono::steady_clock::time_point t0) {
        Rng train_rng(derive_seed(cfg.seed, kTrainTag, static_cast<std::uint64_t>(step)));
        train_to_convergence(model, optimizer, gather_rows(dataset.features, current.train_idx),
                             gather_labels(dataset, current.train_idx), holdout_features, holdout_labels, cfg,
                             train_rng);
        StepRecord rec;
        rec.step = step;
        rec.train_size = static_cast<int>(current.train_idx.size());
        rec.test_accuracy = accuracy(model, test_features, test_labels);
        rec.holdout_loss = mean_holdout_loss(model, holdout_features, holdout_labels);
        rec.mistake_selection_rate = mistake_rate;
        rec.selected_indices = std::move(selected);
        rec.wall_time_ms = elapsed_ms(t0);
        record.steps.push_back(rec);
        if (on_step) on_step(record.steps.back());
    };

    train_and_record(0, std::nullopt, {}, std::chrono::steady_clock::now());

    for (int step = 1; step <= cfg.steps; ++step) {
        if (static_cast<int>(current.pool_idx.size()) < cfg.step_size) {
            record.truncated = true;
            break;
        }
        const auto t0 = std::chrono::steady_clock::now();
        const ModelSnapshot snapshot(model);
        const std::vector<int> selected =
            select_candidates(dataset, current, snapshot, cfg, derive_seed(cfg.seed, kStrategyTag, static_cast<std::uint64_t>(step)));
        const std::optional<double> mistake_rate = mistake_selection_rate(snapshot, dataset, selected);

        current = oracle_annotate(current, selected);
        if (cfg.retrain_mode == RetrainMode::kFromScratch) {
            model = MlpModel(dataset.dim(), cfg.hidden_dims, dataset.num_classes, cfg.dropout_rate,
                             derive_seed(cfg.seed, kInitTag, static_cast<std::uint64_t>(step)));
            optimizer = OptimizerState(model, cfg.adam);
        } else {
            optimizer.reset();
        }
        train_and_record(step, mistake_rate, selected, t0);
    }
    return record;
}

AggregateResult aggregate_runs(const std::vector<RunRecord>& records) {
    AggregateResult result;
    if (records.empty()) throw ConfigError("aggregate_runs: no records");
    result.single_run = records.size() == 1;

    std::size_t common = records.front().steps.size();
    for (const RunRecord& r : records) {
        if (r.steps.size() != common) result.mixed_step_counts = true;
        common = std::min(common, r.steps.size());
    }

    const auto mean_std = [](const std::vector<double>& values) {
        const double n = static_cast<double>(values.size());
        double mean = 0.0;
        for (double v : values) mean += v / n;
        if (values.size() < 2) return std::make_pair(mean, 0.0);
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        return std::make_pair(mean, std::sqrt(ss / (n - 1.0)));
    };

    for (std::size_t s = 0; s < common; ++s) {
        StepAggregate agg;
        agg.step = records.front().steps[s].step;
        agg.runs = static_cast<int>(records.size());
        agg.train_size = records.front().steps[s].train_size;
        std::vector<double> acc, mist;
        for (const RunRecord& r : records) {
            acc.push_back(r.steps[s].test_accuracy);
            if (r.steps[s].mistake_selection_rate) mist.push_back(*r.steps[s].mistake_selection_rate);
        }
        std::tie(agg.mean_accuracy, agg.std_accuracy) = mean_std(acc);
        if (mist.size() == records.size()) {
            const auto [m, sd] = mean_std(mist);
            agg.mean_mistake_rate = m;
            agg.std_mistake_rate = sd;
        }
        result.steps.push_back(agg);
    }
    return result;
}

bool same_results(const RunRecord& a, const RunRecord& b) {
    if (a.dataset_name != b.dataset_name || a.strategy != b.strategy || a.seed != b.seed ||
        a.truncated != b.truncated || a.steps.size() != b.steps.size())
        return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const StepRecord& x = a.steps[i];
        const StepRecord& y = b.steps[i];
        if (x.step != y.step || x.train_size != y.train_size || x.test_accuracy != y.test_accuracy ||
            x.holdout_loss != y.holdout_loss || x.mistake_selection_rate != y.mistake_selection_rate ||
            x.selected_indices != y.selected_indices)
            return false;
    }
    return true;
}

}  // namespace alkit
