#include <doctest.h>

#include <cmath>

#include "alkit/errors.hpp"
#include "alkit/loop.hpp"
#include "testutil.hpp"

using namespace alkit;

namespace {

LoopConfig quick_config(const std::string& strategy, std::uint64_t seed) {
    LoopConfig cfg;
    cfg.strategy = strategy;
    cfg.seed = seed;
    cfg.steps = 2;
    cfg.step_size = 3;
    cfg.max_epochs = 12;
    cfg.early_stopping_patience = 3;
    cfg.hidden_dims = {8};
    cfg.dropout_rate = 0.25;
    cfg.strategy_params.mc_passes = 5;
    cfg.strategy_params.err_subset_size = 20;
    return cfg;
}

struct Bench {
    Dataset dataset;
    Split split;
};

Bench small_bench(std::uint64_t seed) {
    Bench bench;
    bench.dataset = make_blobs(3, std::vector<int>(3, 40), 4, 7, 2.5, 8);
    SplitSpec spec;
    spec.initial_per_class = 3;
    spec.test_fraction = 0.2;
    spec.seed = seed;
    bench.split = make_split(bench.dataset, spec);
    return bench;
}

}  // namespace

TEST_CASE("train_to_convergence: patience 0 stops after exactly one epoch") {
    const Bench bench = small_bench(1);
    MlpModel model(4, {8}, 3, 0.25, 11);
    OptimizerState opt(model);
    LoopConfig cfg = quick_config("random", 1);
    cfg.early_stopping_patience = 0;
    cfg.max_epochs = 50;
    Rng rng(5);
    const Matrix train = gather_rows(bench.dataset.features, bench.split.train_idx);
    std::vector<int> train_labels, hold_labels;
    for (int i : bench.split.train_idx) train_labels.push_back(bench.dataset.labels[i]);
    for (int i : bench.split.holdout_idx) hold_labels.push_back(bench.dataset.labels[i]);
    const Matrix hold = gather_rows(bench.dataset.features, bench.split.holdout_idx);
    const TrainResult result = train_to_convergence(model, opt, train, train_labels, hold, hold_labels, cfg, rng);
    CHECK(result.epochs_used == 1);
}

TEST_CASE("train_to_convergence: linearly separable blobs reach train accuracy 1") {
    // far-apart centers, tiny noise
    const Dataset data = make_blobs(2, {30, 30}, 4, 3, 0.05, 4);
    MlpModel model(4, {16}, 2, 0.0, 21);
    OptimizerState opt(model);
    LoopConfig cfg = quick_config("random", 1);
    cfg.max_epochs = 200;
    cfg.early_stopping_patience = 20;
    Rng rng(6);
    std::vector<int> all(60);
    for (int i = 0; i < 60; ++i) all[i] = i;
    const Matrix x = gather_rows(data.features, all);
    train_to_convergence(model, opt, x, data.labels, x, data.labels, cfg, rng);
    CHECK(accuracy(model, x, data.labels) == 1.0);
}

TEST_CASE("train_to_convergence: fixed seed reproduces the final parameters") {
    const Bench bench = small_bench(2);
    const Matrix train = gather_rows(bench.dataset.features, bench.split.train_idx);
    const Matrix hold = gather_rows(bench.dataset.features, bench.split.holdout_idx);
    std::vector<int> train_labels, hold_labels;
    for (int i : bench.split.train_idx) train_labels.push_back(bench.dataset.labels[i]);
    for (int i : bench.split.holdout_idx) hold_labels.push_back(bench.dataset.labels[i]);
    const LoopConfig cfg = quick_config("random", 1);

    MlpModel a(4, {8}, 3, 0.25, 31);
    OptimizerState opt_a(a);
    Rng rng_a(9);
    train_to_convergence(a, opt_a, train, train_labels, hold, hold_labels, cfg, rng_a);

    MlpModel b(4, {8}, 3, 0.25, 31);
    OptimizerState opt_b(b);
    Rng rng_b(9);
    train_to_convergence(b, opt_b, train, train_labels, hold, hold_labels, cfg, rng_b);
    CHECK(a == b);
}

TEST_CASE("train_to_convergence: non-finite loss raises a training error naming the epoch") {
    const Bench bench = small_bench(3);
    MlpModel model(4, {8}, 3, 0.0, 41);
    model.weights()[0](0, 0) = std::numeric_limits<double>::infinity();
    OptimizerState opt(model);
    Rng rng(10);
    const Matrix train = gather_rows(bench.dataset.features, bench.split.train_idx);
    std::vector<int> train_labels, hold_labels;
    for (int i : bench.split.train_idx) train_labels.push_back(bench.dataset.labels[i]);
    for (int i : bench.split.holdout_idx) hold_labels.push_back(bench.dataset.labels[i]);
    const Matrix hold = gather_rows(bench.dataset.features, bench.split.holdout_idx);
    try {
        train_to_convergence(model, opt, train, train_labels, hold, hold_labels, quick_config("random", 1), rng);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
    CHECK_THROWS_AS(train_to_convergence(model, opt, Matrix(0, 4), {}, hold, hold_labels,
                                         quick_config("random", 1), rng),
                    TrainingError);
}

TEST_CASE("run_active_learning: bookkeeping and baseline-only runs") {
    const Bench bench = small_bench(4);
    SUBCASE("S = 0 gives a single baseline record") {
        LoopConfig cfg = quick_config("random", 1);
        cfg.steps = 0;
        const RunRecord record = run_active_learning(bench.dataset, bench.split, cfg);
        REQUIRE(record.steps.size() == 1);
        CHECK(record.steps[0].step == 0);
        CHECK_FALSE(record.steps[0].mistake_selection_rate.has_value());
        CHECK_FALSE(record.truncated);
    }
    SUBCASE("train size grows by exactly K per step") {
        const LoopConfig cfg = quick_config("entropy", 2);
        const RunRecord record = run_active_learning(bench.dataset, bench.split, cfg);
        REQUIRE(record.steps.size() == 3);
        const int initial = static_cast<int>(bench.split.train_idx.size());
        for (int s = 0; s <= 2; ++s) {
            CHECK(record.steps[s].train_size == initial + s * cfg.step_size);
            CHECK(record.steps[s].test_accuracy >= 0.0);
            CHECK(record.steps[s].test_accuracy <= 1.0);
            CHECK(std::isfinite(record.steps[s].holdout_loss));
            if (s > 0) {
                CHECK(record.steps[s].mistake_selection_rate.has_value());
                CHECK(static_cast<int>(record.steps[s].selected_indices.size()) == cfg.step_size);
            }
        }
    }
    SUBCASE("unknown strategy is rejected") {
        LoopConfig cfg = quick_config("bogus", 1);
        CHECK_THROWS_AS(run_active_learning(bench.dataset, bench.split, cfg), ConfigError);
    }
}

TEST_CASE("run_active_learning: deterministic across executions for every strategy") {
    const Bench bench = small_bench(5);
    for (const std::string& id : strategy_ids()) {
        LoopConfig cfg = quick_config(id, 7);
        cfg.steps = 1;
        const RunRecord a = run_active_learning(bench.dataset, bench.split, cfg);
        const RunRecord b = run_active_learning(bench.dataset, bench.split, cfg);
        CHECK(same_results(a, b));
    }
}

TEST_CASE("run_active_learning: pool exhaustion truncates with a flag") {
    Bench bench = small_bench(6);
    LoopConfig cfg = quick_config("random", 3);
    cfg.step_size = static_cast<int>(bench.split.pool_idx.size()) - 1;
    cfg.steps = 5;
    const RunRecord record = run_active_learning(bench.dataset, bench.split, cfg);
    CHECK(record.truncated);
    CHECK(record.steps.size() == 2);  // baseline + one full step
}

TEST_CASE("label hygiene: corrupting hidden pool labels never changes the selection") {
    const Bench bench = small_bench(8);
    MlpModel model(4, {8}, 3, 0.25, 51);
    const ModelSnapshot snapshot(model);

    Dataset corrupted = bench.dataset;
    for (int i : bench.split.pool_idx)
        corrupted.labels[static_cast<std::size_t>(i)] =
            (corrupted.labels[static_cast<std::size_t>(i)] + 1) % corrupted.num_classes;

    for (const std::string& id : strategy_ids()) {
        LoopConfig cfg = quick_config(id, 13);
        const std::vector<int> clean = select_candidates(bench.dataset, bench.split, snapshot, cfg, 99);
        const std::vector<int> dirty = select_candidates(corrupted, bench.split, snapshot, cfg, 99);
        CHECK(clean == dirty);
    }
}

TEST_CASE("mistake_selection_rate judges the pre-annotation snapshot") {
    // linear model fixed to always predict class 0
    MlpModel model(2, {}, 2, 0.0, 61);
    model.weights()[0].fill(0.0);
    model.biases()[0].fill(0.0);
    model.biases()[0](0, 0) = 10.0;
    const ModelSnapshot snapshot(model);

    Dataset data;
    data.features = Matrix(4, 2, 0.5);
    data.num_classes = 2;
    data.name = "tiny";
    SUBCASE("all selected wrongly predicted") {
        data.labels = {1, 1, 1, 1};
        CHECK(*mistake_selection_rate(snapshot, data, {0, 1, 2, 3}) == 1.0);
    }
    SUBCASE("none wrongly predicted") {
        data.labels = {0, 0, 0, 0};
        CHECK(*mistake_selection_rate(snapshot, data, {0, 1, 2, 3}) == 0.0);
    }
    SUBCASE("empty selection reports absent") {
        data.labels = {0, 0, 0, 0};
        CHECK_FALSE(mistake_selection_rate(snapshot, data, {}).has_value());
    }
    SUBCASE("half wrong") {
        data.labels = {0, 1, 0, 1};
        CHECK(*mistake_selection_rate(snapshot, data, {0, 1, 2, 3}) == 0.5);
    }
}

TEST_CASE("aggregate_runs") {
    RunRecord a;
    a.dataset_name = "d";
    a.strategy = "random";
    a.steps.push_back({0, 10, 0.4, 1.0, std::nullopt, {}, 0});
    a.steps.push_back({1, 12, 0.5, 0.9, 0.8, {1, 2}, 0});
    RunRecord b = a;
    b.seed = 1;
    b.steps[0].test_accuracy = 0.6;
    b.steps[1].test_accuracy = 0.7;
    b.steps[1].mistake_selection_rate = 0.6;

    SUBCASE("single run is flagged with zero std") {
        const AggregateResult result = aggregate_runs({a});
        CHECK(result.single_run);
        CHECK(result.steps[0].std_accuracy == 0.0);
    }
    SUBCASE("two-run mean and unbiased std") {
        const AggregateResult result = aggregate_runs({a, b});
        CHECK(result.steps[0].mean_accuracy == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(result.steps[0].std_accuracy == doctest::Approx(std::sqrt(0.02)).epsilon(1e-9));
        CHECK(*result.steps[1].mean_mistake_rate == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("permuting run order leaves aggregates unchanged") {
        const AggregateResult x = aggregate_runs({a, b});
        const AggregateResult y = aggregate_runs({b, a});
        for (std::size_t s = 0; s < x.steps.size(); ++s) {
            CHECK(x.steps[s].mean_accuracy == y.steps[s].mean_accuracy);
            CHECK(x.steps[s].std_accuracy == y.steps[s].std_accuracy);
        }
    }
    SUBCASE("mixed step counts aggregate the common prefix with a warning") {
        RunRecord c = a;
        c.steps.pop_back();
        const AggregateResult result = aggregate_runs({a, c});
        CHECK(result.mixed_step_counts);
        CHECK(result.steps.size() == 1);
    }
}
