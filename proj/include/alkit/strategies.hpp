#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alkit/matrix.hpp"
#include "alkit/mlp.hpp"

namespace alkit {

// One pool candidate as seen by a strategy: its row in the pool feature
// matrix, the snapshot's argmax prediction, and the acquisition score.
struct ScoredCandidate {
    int pool_index = 0;  // row position within the scored pool matrix
    double score = 0.0;
    int pseudo_label = 0;
    std::optional<bool> eval_only_is_wrong;  // filled by the loop for reporting
};

struct OursConfig {
    double eta = 1e-3;
    int inner_iterations = 3;
};

// Everything the gradient criteria need about the holdout set against one
// frozen snapshot: penultimate features, the final-layer weight matrix, the
// baseline logits/loss, and the summed holdout weight gradient. Must be
// rebuilt whenever the snapshot changes; scoring calls verify the match.
class HoldoutCache {
public:
    HoldoutCache(const ModelSnapshot& snapshot, const Matrix& holdout_features,
                 const std::vector<int>& holdout_labels);

    const Matrix& features() const { return features_; }  // |V| x d
    const std::vector<int>& labels() const { return labels_; }
    const Matrix& baseline_logits() const { return baseline_logits_; }
    double baseline_total_loss() const { return baseline_total_loss_; }
    // sum over holdout samples of the final-layer weight gradient, d x C
    const Matrix& weight_gradient() const { return weight_gradient_; }

    void check_snapshot(const ModelSnapshot& snapshot) const;

private:
    MlpModel model_;  // the parameters this cache was built against
    Matrix features_;
    std::vector<int> labels_;
    Matrix baseline_logits_;
    double baseline_total_loss_ = 0.0;
    Matrix weight_gradient_;
};

// Generalization-error delta: fine-tune the final layer on the pseudo-labeled
// candidate, score by the change in total holdout loss. Positive scores flag
// predictions whose reinforcement hurts the holdout.
std::vector<ScoredCandidate> score_ours(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                        const HoldoutCache& holdout, const OursConfig& cfg);

// First-order variant: negated dot product between the candidate's
// pseudo-label gradient and the summed holdout gradient, final layer only.
std::vector<ScoredCandidate> score_ours_app(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                            const HoldoutCache& holdout);

// Gradient-similarity kernel of two (sample, label) pairs, final weight
// matrix scope: equals (residual_i . residual_j) * (phi_i . phi_j).
double kernel_value(const ModelSnapshot& snapshot, std::span<const double> x_i, int y_i,
                    std::span<const double> x_j, int y_j);

std::vector<int> select_random(const std::vector<int>& pool_indices, int k, std::uint64_t seed);

std::vector<ScoredCandidate> score_entropy(const ModelSnapshot& snapshot, const Matrix& pool_features);

std::vector<ScoredCandidate> score_mc_dropout(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                              int passes, std::uint64_t seed);

// Mutual information between prediction and dropout posterior:
// H[mean_t p_t] - mean_t H[p_t], clamped at zero.
std::vector<ScoredCandidate> score_bald(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                        int passes, std::uint64_t seed);

// Reductions over an explicit pass tensor (one probability matrix per pass).
std::vector<double> predictive_entropy_of_passes(const std::vector<Matrix>& passes);
std::vector<double> bald_of_passes(const std::vector<Matrix>& passes);

// Greedy k-center in penultimate feature space; returns pool row positions
// in selection order.
std::vector<int> select_coreset_greedy(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                       const Matrix& train_features, int k);

// Gradient-embedding k-means++ seeding; embedding is the final-layer
// pseudo-label gradient (p - onehot) x phi, flattened to C*d.
std::vector<int> select_badge(const ModelSnapshot& snapshot, const Matrix& pool_features, int k,
                              std::uint64_t seed);

// Explicit BADGE embeddings (N x C*d); the selection itself uses a factored
// distance computation and never materializes this matrix.
Matrix badge_embeddings(const ModelSnapshot& snapshot, const Matrix& pool_features);

// Expected-error-reduction baseline: same inner loop as score_ours, scored by
// the drop in mean predictive entropy over a fixed seeded pool subset.
std::vector<ScoredCandidate> score_err_reduction(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                                 std::uint64_t pool_subset_seed, int subset_size,
                                                 const OursConfig& cfg);

// Descending score, ties broken by ascending pool index.
std::vector<int> top_k(const std::vector<ScoredCandidate>& candidates, int k);

// --- strategy registry -----------------------------------------------------

struct StrategyParams {
    OursConfig ours;
    int mc_passes = 25;
    int err_subset_size = 1000;
    int pool_subsample = 0;  // 0 = score the whole pool
};

struct SelectionContext {
    const ModelSnapshot& snapshot;
    const Matrix& pool_features;           // rows parallel to pool_positions
    const Matrix* train_features = nullptr;  // raw inputs, coreset only
    const HoldoutCache* holdout = nullptr;   // ours / ours_app only
    std::uint64_t seed = 0;
};

const std::vector<std::string>& strategy_ids();
bool strategy_needs_holdout(const std::string& id);

// Dispatch by stable identifier; returns row positions into pool_features.
std::vector<int> select_with_strategy(const std::string& id, const SelectionContext& ctx, int k,
                                      const StrategyParams& params);

}  // namespace alkit
