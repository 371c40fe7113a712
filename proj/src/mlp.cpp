#include "alkit/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "alkit/errors.hpp"

namespace alkit {

MlpModel::MlpModel(int input_dim, const std::vector<int>& hidden_dims, int num_classes, double dropout_rate,
                   std::uint64_t init_seed)
    : dropout_rate_(dropout_rate) {
    if (input_dim < 1 || num_classes < 1) throw DimensionError("model needs input_dim >= 1 and num_classes >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ConfigError("dropout_rate must be in [0, 1)");
    layer_dims_.push_back(input_dim);
    for (int h : hidden_dims) {
        if (h < 1) throw DimensionError("hidden layer width must be >= 1");
        layer_dims_.push_back(h);
    }
    layer_dims_.push_back(num_classes);

    Rng rng(init_seed);
    for (std::size_t l = 0; l + 1 < layer_dims_.size(); ++l) {
        const int fan_in = layer_dims_[l];
        const int fan_out = layer_dims_[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Matrix w(fan_in, fan_out);
        for (int i = 0; i < fan_in; ++i)
            for (int j = 0; j < fan_out; ++j) w(i, j) = rng.uniform(-bound, bound);
        weights_.push_back(std::move(w));
        biases_.emplace_back(1, fan_out);
    }
}

namespace {

void add_bias_rows(Matrix& m, const Matrix& bias) {
    for (int r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        auto b = bias.row(0);
        for (int c = 0; c < m.cols(); ++c) row[c] += b[c];
    }
}

void check_labels(const std::vector<int>& labels, int n_rows, int n_classes) {
    if (static_cast<int>(labels.size()) != n_rows) throw LabelError("label count does not match row count");
    for (int y : labels)
        if (y < 0 || y >= n_classes) throw LabelError("label out of range [0, C)");
}

}  // namespace

ForwardResult forward(const MlpModel& model, const Matrix& inputs, ForwardMode mode, Rng* rng) {
    if (inputs.cols() != model.input_dim()) throw DimensionError("forward: input width does not match model");
    const bool dropout_active = mode == ForwardMode::kTrainDropout && model.dropout_rate() > 0.0;
    if (dropout_active && rng == nullptr) throw StateError("forward: dropout mode requires an rng");

    ForwardResult out;
    out.cache.mode = mode;
    out.cache.layer_dims = model.layer_dims();
    out.cache.input = inputs;

    const int n_layers = model.num_layers();
    Matrix current = inputs;
    for (int l = 0; l < n_layers; ++l) {
        Matrix z = matmul(current, model.weights()[static_cast<std::size_t>(l)]);
        add_bias_rows(z, model.biases()[static_cast<std::size_t>(l)]);
        out.cache.preacts.push_back(z);
        if (l == n_layers - 1) {
            out.logits = std::move(z);
            break;
        }
        // hidden layer: rectify, then inverted dropout
        Matrix a = std::move(z);
        for (double& v : a.storage()) v = v > 0.0 ? v : 0.0;
        if (dropout_active) {
            const double keep = 1.0 - model.dropout_rate();
            Matrix scale(a.rows(), a.cols());
            for (std::size_t i = 0; i < a.size(); ++i)
                scale.storage()[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) a.storage()[i] *= scale.storage()[i];
            out.cache.mask_scale.push_back(std::move(scale));
        } else {
            out.cache.mask_scale.emplace_back(a.rows(), a.cols(), 1.0);
        }
        out.cache.acts.push_back(a);
        current = std::move(a);
    }
    return out;
}

SoftmaxXentResult softmax_xent(const Matrix& logits, const std::vector<int>& labels) {
    const int n = logits.rows();
    const int c = logits.cols();
    check_labels(labels, n, c);

    SoftmaxXentResult out;
    out.probs = Matrix(n, c);
    out.per_sample.resize(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        auto z = logits.row(i);
        const double zmax = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (int j = 0; j < c; ++j) sum += std::exp(z[j] - zmax);
        const double lse = zmax + std::log(sum);
        auto p = out.probs.row(i);
        for (int j = 0; j < c; ++j) p[j] = std::exp(z[j] - lse);
        const double loss = lse - z[labels[static_cast<std::size_t>(i)]];
        out.per_sample[static_cast<std::size_t>(i)] = loss;
        total += loss;
    }
    out.mean_loss = n > 0 ? total / n : 0.0;
    return out;
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, const std::vector<int>& labels,
                   GradScope scope) {
    if (cache.layer_dims != model.layer_dims()) throw StateError("backward: cache does not match this model");
    const int n_layers = model.num_layers();
    if (static_cast<int>(cache.preacts.size()) != n_layers) throw StateError("backward: incomplete cache");
    const Matrix& logits = cache.preacts.back();
    const int n = logits.rows();
    check_labels(labels, n, model.num_classes());

    // d mean_loss / d logits = (probs - onehot) / N
    SoftmaxXentResult sm = softmax_xent(logits, labels);
    Matrix delta = std::move(sm.probs);
    const double inv_n = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        auto row = delta.row(i);
        row[labels[static_cast<std::size_t>(i)]] -= 1.0;
        for (int j = 0; j < delta.cols(); ++j) row[j] *= inv_n;
    }

    Gradients grads;
    grads.scope = scope;
    const int first_layer = scope == GradScope::kLastLayerOnly ? n_layers - 1 : 0;
    grads.weights.resize(static_cast<std::size_t>(n_layers - first_layer));
    grads.biases.resize(static_cast<std::size_t>(n_layers - first_layer));

    for (int l = n_layers - 1; l >= first_layer; --l) {
        const Matrix& below = l == 0 ? cache.input : cache.acts[static_cast<std::size_t>(l - 1)];
        Matrix dw = matmul_tn(below, delta);
        Matrix db(1, delta.cols());
        for (int i = 0; i < delta.rows(); ++i) {
            auto row = delta.row(i);
            for (int j = 0; j < delta.cols(); ++j) db(0, j) += row[j];
        }
        grads.weights[static_cast<std::size_t>(l - first_layer)] = std::move(dw);
        grads.biases[static_cast<std::size_t>(l - first_layer)] = std::move(db);
        if (l == first_layer) break;

        Matrix da = matmul_nt(delta, model.weights()[static_cast<std::size_t>(l)]);
        const Matrix& z = cache.preacts[static_cast<std::size_t>(l - 1)];
        const Matrix& scale = cache.mask_scale[static_cast<std::size_t>(l - 1)];
        for (std::size_t i = 0; i < da.size(); ++i)
            da.storage()[i] *= (z.storage()[i] > 0.0 ? 1.0 : 0.0) * scale.storage()[i];
        delta = std::move(da);
    }
    return grads;
}

Matrix penultimate_features(const MlpModel& model, const Matrix& inputs) {
    if (inputs.cols() != model.input_dim()) throw DimensionError("penultimate_features: input width mismatch");
    Matrix current = inputs;
    for (int l = 0; l + 1 < model.num_layers(); ++l) {
        Matrix z = matmul(current, model.weights()[static_cast<std::size_t>(l)]);
        add_bias_rows(z, model.biases()[static_cast<std::size_t>(l)]);
        for (double& v : z.storage()) v = v > 0.0 ? v : 0.0;
        current = std::move(z);
    }
    return current;
}

std::vector<double> binary_logistic_grad(double z, double y, const std::vector<double>& phi) {
    const double residual = sigmoid(z) - y;
    std::vector<double> grad(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) grad[i] = residual * phi[i];
    return grad;
}

std::vector<Matrix> mc_dropout_probs(const MlpModel& model, const Matrix& inputs, int passes, std::uint64_t seed) {
    if (passes < 1) throw ConfigError("mc_dropout_probs: passes must be >= 1");
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(passes));
    for (int t = 0; t < passes; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        ForwardResult fwd = forward(model, inputs, ForwardMode::kTrainDropout, &rng);
        out.push_back(softmax_rows(fwd.logits));
    }
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix probs(logits.rows(), logits.cols());
    for (int i = 0; i < logits.rows(); ++i) {
        auto z = logits.row(i);
        const double zmax = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (int j = 0; j < logits.cols(); ++j) sum += std::exp(z[j] - zmax);
        auto p = probs.row(i);
        for (int j = 0; j < logits.cols(); ++j) p[j] = std::exp(z[j] - zmax) / sum;
    }
    return probs;
}

Matrix eval_probs(const MlpModel& model, const Matrix& inputs) {
    return softmax_rows(forward(model, inputs, ForwardMode::kEval).logits);
}

std::vector<int> argmax_rows(const Matrix& scores) {
    std::vector<int> out(static_cast<std::size_t>(scores.rows()));
    for (int i = 0; i < scores.rows(); ++i) {
        auto row = scores.row(i);
        out[static_cast<std::size_t>(i)] =
            static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

double accuracy(const MlpModel& model, const Matrix& inputs, const std::vector<int>& labels) {
    if (inputs.rows() == 0) throw DimensionError("accuracy: empty input");
    const std::vector<int> predicted = argmax_rows(forward(model, inputs, ForwardMode::kEval).logits);
    check_labels(labels, inputs.rows(), model.num_classes());
    int correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (predicted[i] == labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace alkit
