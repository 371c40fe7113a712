#include "alkit/optim.hpp"

#include <cmath>

#include "alkit/errors.hpp"

namespace alkit {

OptimizerState::OptimizerState(const MlpModel& model, AdamConfig config) : config_(config) {
    for (const Matrix& w : model.weights()) {
        m_weights.emplace_back(w.rows(), w.cols());
        v_weights.emplace_back(w.rows(), w.cols());
    }
    for (const Matrix& b : model.biases()) {
        m_biases.emplace_back(b.rows(), b.cols());
        v_biases.emplace_back(b.rows(), b.cols());
    }
}

void OptimizerState::reset() {
    for (Matrix& m : m_weights) m.fill(0.0);
    for (Matrix& m : v_weights) m.fill(0.0);
    for (Matrix& m : m_biases) m.fill(0.0);
    for (Matrix& m : v_biases) m.fill(0.0);
    steps_ = 0;
}

void sgd_step(Matrix& params, const Matrix& grads, double eta) {
    if (eta < 0.0) throw ConfigError("sgd_step: eta must be >= 0");
    if (!params.same_shape(grads)) throw DimensionError("sgd_step: parameter/gradient shape mismatch");
    params.add_scaled(grads, -eta);
}

void sgd_step(MlpModel& model, const Gradients& grads, double eta) {
    const std::size_t offset =
        grads.scope == GradScope::kLastLayerOnly ? model.weights().size() - 1 : 0;
    for (std::size_t i = 0; i < grads.weights.size(); ++i) {
        sgd_step(model.weights()[offset + i], grads.weights[i], eta);
        sgd_step(model.biases()[offset + i], grads.biases[i], eta);
    }
}

namespace {

void adam_update(Matrix& params, const Matrix& grad, Matrix& m, Matrix& v, const AdamConfig& cfg,
                 double bias1, double bias2) {
    if (!params.same_shape(grad) || !params.same_shape(m) || !params.same_shape(v))
        throw DimensionError("adam_step: parameter/gradient shape mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad.storage()[i];
        double& mi = m.storage()[i];
        double& vi = v.storage()[i];
        mi = cfg.beta1 * mi + (1.0 - cfg.beta1) * g;
        vi = cfg.beta2 * vi + (1.0 - cfg.beta2) * g * g;
        const double m_hat = mi / bias1;
        const double v_hat = vi / bias2;
        params.storage()[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

}  // namespace

void adam_step(MlpModel& model, const Gradients& grads, OptimizerState& state) {
    if (grads.scope != GradScope::kAllLayers || grads.weights.size() != model.weights().size())
        throw StateError("adam_step: expects all-layer gradients for this model");
    state.steps_ += 1;
    const AdamConfig& cfg = state.config();
    const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.steps_));
    const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.steps_));
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        adam_update(model.weights()[l], grads.weights[l], state.m_weights[l], state.v_weights[l], cfg, bias1, bias2);
        adam_update(model.biases()[l], grads.biases[l], state.m_biases[l], state.v_biases[l], cfg, bias1, bias2);
    }
}

}  // namespace alkit
