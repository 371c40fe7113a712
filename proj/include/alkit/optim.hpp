#pragma once

#include <cstdint>
#include <vector>

#include "alkit/matrix.hpp"
#include "alkit/mlp.hpp"

namespace alkit {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam moment accumulators, mirroring the parameter shapes of one model.
// reset() zeroes moments and the step counter without touching parameters.
class OptimizerState {
public:
    OptimizerState() = default;
    explicit OptimizerState(const MlpModel& model, AdamConfig config = {});

    void reset();

    const AdamConfig& config() const { return config_; }
    std::int64_t steps() const { return steps_; }

    std::vector<Matrix> m_weights, v_weights;
    std::vector<Matrix> m_biases, v_biases;

private:
    friend void adam_step(MlpModel&, const Gradients&, OptimizerState&);
    AdamConfig config_;
    std::int64_t steps_ = 0;
};

// params <- params - eta * grads
void sgd_step(Matrix& params, const Matrix& grads, double eta);
void sgd_step(MlpModel& model, const Gradients& grads, double eta);

// Bias-corrected Adam update over all layers.
void adam_step(MlpModel& model, const Gradients& grads, OptimizerState& state);

}  // namespace alkit
