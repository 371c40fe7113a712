#include <doctest.h>

#include "alkit/errors.hpp"
#include "alkit/optim.hpp"
#include "testutil.hpp"

using namespace alkit;

TEST_CASE("sgd_step") {
    SUBCASE("eta = 0 is the identity") {
        Matrix p(2, 2, std::vector<double>{1, 2, 3, 4});
        const Matrix saved = p;
        Matrix g(2, 2, 5.0);
        sgd_step(p, g, 0.0);
        CHECK(p == saved);
    }
    SUBCASE("scalar arithmetic") {
        Matrix p(1, 1, 1.0);
        Matrix g(1, 1, 2.0);
        sgd_step(p, g, 0.1);
        CHECK(p(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
    }
    SUBCASE("three fixed-gradient steps equal one summed step") {
        Matrix p1(1, 3, std::vector<double>{1.0, -2.0, 0.5});
        Matrix p2 = p1;
        Matrix g(1, 3, std::vector<double>{0.3, 0.1, -0.7});
        for (int i = 0; i < 3; ++i) sgd_step(p1, g, 0.05);
        sgd_step(p2, g, 3 * 0.05);
        for (std::size_t i = 0; i < p1.size(); ++i)
            CHECK(p1.storage()[i] == doctest::Approx(p2.storage()[i]).epsilon(1e-14));
    }
    SUBCASE("shape mismatch and negative eta rejected") {
        Matrix p(1, 2, 0.0);
        Matrix g(2, 1, 0.0);
        CHECK_THROWS_AS(sgd_step(p, g, 0.1), DimensionError);
        Matrix g2(1, 2, 0.0);
        CHECK_THROWS_AS(sgd_step(p, g2, -1.0), ConfigError);
    }
}

namespace {

Gradients scalar_grads(double g) {
    Gradients grads;
    grads.scope = GradScope::kAllLayers;
    grads.weights.emplace_back(1, 1, g);
    grads.biases.emplace_back(1, 1, 0.0);
    return grads;
}

MlpModel scalar_model() {
    MlpModel model(1, {}, 1, 0.0, 1);
    model.weights()[0](0, 0) = 1.0;
    model.biases()[0](0, 0) = 0.0;
    return model;
}

}  // namespace

TEST_CASE("adam_step") {
    SUBCASE("zero gradient at step 1 leaves parameters unchanged") {
        MlpModel model = scalar_model();
        OptimizerState state(model);
        adam_step(model, scalar_grads(0.0), state);
        CHECK(model.weights()[0](0, 0) == 1.0);
        CHECK(state.steps() == 1);
    }
    SUBCASE("single hand-evaluated step") {
        // lr=0.1, g=1: bias-corrected m_hat = v_hat = 1, so the update is
        // lr * 1 / (1 + eps)
        MlpModel model = scalar_model();
        AdamConfig cfg;
        cfg.learning_rate = 0.1;
        OptimizerState state(model, cfg);
        adam_step(model, scalar_grads(1.0), state);
        const double expected = 1.0 - 0.1 / (1.0 + cfg.epsilon);
        CHECK(model.weights()[0](0, 0) == doctest::Approx(expected).epsilon(1e-15));
    }
    SUBCASE("reset replays the identical trajectory") {
        MlpModel a = scalar_model();
        OptimizerState state(a);
        std::vector<double> first;
        for (int i = 0; i < 5; ++i) {
            adam_step(a, scalar_grads(0.5 + i), state);
            first.push_back(a.weights()[0](0, 0));
        }
        state.reset();
        CHECK(state.steps() == 0);
        MlpModel b = scalar_model();
        for (int i = 0; i < 5; ++i) {
            adam_step(b, scalar_grads(0.5 + i), state);
            CHECK(b.weights()[0](0, 0) == first[static_cast<std::size_t>(i)]);
        }
    }
    SUBCASE("moment shapes mirror parameters") {
        const MlpModel model(3, {4}, 2, 0.0, 9);
        const OptimizerState state(model);
        REQUIRE(state.m_weights.size() == 2);
        CHECK(state.m_weights[0].same_shape(model.weights()[0]));
        CHECK(state.v_weights[1].same_shape(model.weights()[1]));
        CHECK(state.m_biases[0].same_shape(model.biases()[0]));
    }
    SUBCASE("last-layer-only gradients are rejected") {
        MlpModel model(3, {4}, 2, 0.0, 10);
        OptimizerState state(model);
        Gradients grads;
        grads.scope = GradScope::kLastLayerOnly;
        grads.weights.emplace_back(4, 2, 0.0);
        grads.biases.emplace_back(1, 2, 0.0);
        CHECK_THROWS_AS(adam_step(model, grads, state), StateError);
    }
}
