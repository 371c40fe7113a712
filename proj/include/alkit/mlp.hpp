#pragma once

#include <cstdint>
#include <vector>

#include "alkit/matrix.hpp"
#include "alkit/rng.hpp"

namespace alkit {

enum class ForwardMode { kEval, kTrainDropout };
enum class GradScope { kAllLayers, kLastLayerOnly };

// Fully connected network: input -> hidden dims (rectified, optional dropout)
// -> linear logits. weights[l] has shape layer_dims[l] x layer_dims[l+1].
class MlpModel {
public:
    MlpModel() = default;
    MlpModel(int input_dim, const std::vector<int>& hidden_dims, int num_classes, double dropout_rate,
             std::uint64_t init_seed);

    const std::vector<int>& layer_dims() const { return layer_dims_; }
    int input_dim() const { return layer_dims_.front(); }
    int num_classes() const { return layer_dims_.back(); }
    int num_layers() const { return static_cast<int>(weights_.size()); }
    // width of the feature space feeding the final linear layer
    int penultimate_dim() const { return layer_dims_[layer_dims_.size() - 2]; }
    double dropout_rate() const { return dropout_rate_; }

    std::vector<Matrix>& weights() { return weights_; }
    const std::vector<Matrix>& weights() const { return weights_; }
    std::vector<Matrix>& biases() { return biases_; }
    const std::vector<Matrix>& biases() const { return biases_; }

    bool operator==(const MlpModel& other) const = default;

private:
    std::vector<int> layer_dims_;
    std::vector<Matrix> weights_;
    std::vector<Matrix> biases_;  // each 1 x layer_dims[l+1]
    double dropout_rate_ = 0.0;
};

// Frozen deep copy of the parameters at one training step. Scoring a pool
// against a snapshot never mutates it.
class ModelSnapshot {
public:
    explicit ModelSnapshot(const MlpModel& model) : model_(model) {}
    const MlpModel& model() const { return model_; }

private:
    MlpModel model_;
};

// Per-layer intermediate state of one forward pass, consumed by backward().
struct ForwardCache {
    ForwardMode mode = ForwardMode::kEval;
    std::vector<int> layer_dims;
    Matrix input;
    std::vector<Matrix> preacts;     // one per layer; last entry is the logits
    std::vector<Matrix> acts;        // hidden layers only, post-rectifier post-dropout
    std::vector<Matrix> mask_scale;  // hidden layers only; 0 or 1/(1-rate)
};

struct ForwardResult {
    Matrix logits;
    ForwardCache cache;
};

struct SoftmaxXentResult {
    double mean_loss = 0.0;
    std::vector<double> per_sample;
    Matrix probs;
};

// Gradient of the mean loss. For kAllLayers, weights/biases hold one entry
// per layer; for kLastLayerOnly they hold a single entry (the final layer).
struct Gradients {
    GradScope scope = GradScope::kAllLayers;
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
};

ForwardResult forward(const MlpModel& model, const Matrix& inputs, ForwardMode mode, Rng* rng = nullptr);

SoftmaxXentResult softmax_xent(const Matrix& logits, const std::vector<int>& labels);

Gradients backward(const MlpModel& model, const ForwardCache& cache, const std::vector<int>& labels,
                   GradScope scope);

// Eval-mode forward truncated before the final linear layer. With no hidden
// layers this is the input itself.
Matrix penultimate_features(const MlpModel& model, const Matrix& inputs);

// (sigmoid(z) - y) * phi, the single-layer binary cross-entropy gradient.
// y is 0 or 1 for hard labels; fractional targets are accepted as-is.
std::vector<double> binary_logistic_grad(double z, double y, const std::vector<double>& phi);

// One softmax probability matrix per dropout pass; pass t draws its masks
// from derive_seed(seed, t).
std::vector<Matrix> mc_dropout_probs(const MlpModel& model, const Matrix& inputs, int passes, std::uint64_t seed);

Matrix softmax_rows(const Matrix& logits);
Matrix eval_probs(const MlpModel& model, const Matrix& inputs);
std::vector<int> argmax_rows(const Matrix& scores);
double accuracy(const MlpModel& model, const Matrix& inputs, const std::vector<int>& labels);

double sigmoid(double z);

}  // namespace alkit
