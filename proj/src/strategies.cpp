#include "alkit/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alkit/errors.hpp"
#include "alkit/rng.hpp"

namespace alkit {

namespace {

constexpr std::uint64_t kRandomTag = 0x52414e44;
constexpr std::uint64_t kDropoutTag = 0x44524f50;
constexpr std::uint64_t kBadgeTag = 0x42414447;
constexpr std::uint64_t kSubsetTag = 0x53554253;
constexpr std::uint64_t kSubsampleTag = 0x53554250;

// logits = phi * W + b for one feature row, written into out (size C)
void last_layer_logits(std::span<const double> phi, const Matrix& w, const Matrix& b, std::span<double> out) {
    const int c = w.cols();
    for (int j = 0; j < c; ++j) out[j] = b(0, j);
    for (int i = 0; i < w.rows(); ++i) {
        const double f = phi[static_cast<std::size_t>(i)];
        if (f == 0.0) continue;
        auto wrow = w.row(i);
        for (int j = 0; j < c; ++j) out[j] += f * wrow[j];
    }
}

void softmax_inplace(std::span<double> z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

double xent_of_logits(std::span<const double> z, int label) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    return zmax + std::log(sum) - z[static_cast<std::size_t>(label)];
}

double entropy_of_probs(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

double squared_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

Matrix logits_from_features(const Matrix& phi, const Matrix& w, const Matrix& b) {
    Matrix z = matmul(phi, w);
    for (int i = 0; i < z.rows(); ++i) {
        auto row = z.row(i);
        for (int j = 0; j < z.cols(); ++j) row[j] += b(0, j);
    }
    return z;
}

// Runs `iterations` SGD steps of the single-sample pseudo-label loss on the
// final weight matrix, starting from the snapshot weights. The update stays
// rank-one (W_t = W + phi * r^T), so only the logit offset r is tracked:
// candidate logits are z_base + |phi|^2 * r and any other sample's logits
// shift by (phi_other . phi) * r. Exact, no approximation involved.
std::vector<double> pseudo_label_offset(std::span<const double> z_base, double phi_sq_norm, int pseudo_label,
                                        double eta, int iterations) {
    const std::size_t c = z_base.size();
    std::vector<double> offset(c, 0.0);
    std::vector<double> z(c);
    for (int t = 0; t < iterations; ++t) {
        for (std::size_t j = 0; j < c; ++j) z[j] = z_base[j] + phi_sq_norm * offset[j];
        softmax_inplace(z);
        z[static_cast<std::size_t>(pseudo_label)] -= 1.0;
        for (std::size_t j = 0; j < c; ++j) offset[j] -= eta * z[j];
    }
    return offset;
}

struct PoolView {
    Matrix features;        // penultimate, N x d
    Matrix logits;          // N x C at the snapshot
    std::vector<int> pseudo_labels;
};

PoolView build_pool_view(const ModelSnapshot& snapshot, const Matrix& pool_features) {
    const MlpModel& model = snapshot.model();
    PoolView view;
    view.features = penultimate_features(model, pool_features);
    view.logits = logits_from_features(view.features, model.weights().back(), model.biases().back());
    view.pseudo_labels = argmax_rows(view.logits);
    return view;
}

int weighted_draw(const std::vector<double>& weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return -1;
    const double u = rng.uniform() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (u < cum) return static_cast<int>(i);
    }
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0) return static_cast<int>(i);
    return -1;
}

}  // namespace

HoldoutCache::HoldoutCache(const ModelSnapshot& snapshot, const Matrix& holdout_features,
                           const std::vector<int>& holdout_labels) {
    if (holdout_features.rows() == 0) throw ConfigError("holdout cache: holdout set is empty");
    const MlpModel& model = snapshot.model();
    if (static_cast<int>(holdout_labels.size()) != holdout_features.rows())
        throw LabelError("holdout cache: label count mismatch");
    for (int y : holdout_labels)
        if (y < 0 || y >= model.num_classes()) throw LabelError("holdout cache: label out of range");

    model_ = model;
    features_ = penultimate_features(model, holdout_features);
    labels_ = holdout_labels;
    baseline_logits_ = logits_from_features(features_, model.weights().back(), model.biases().back());

    Matrix residuals(baseline_logits_.rows(), baseline_logits_.cols());
    for (int j = 0; j < baseline_logits_.rows(); ++j) {
        auto z = baseline_logits_.row(j);
        baseline_total_loss_ += xent_of_logits(z, labels_[static_cast<std::size_t>(j)]);
        auto r = residuals.row(j);
        std::copy(z.begin(), z.end(), r.begin());
        softmax_inplace(r);
        r[labels_[static_cast<std::size_t>(j)]] -= 1.0;
    }
    weight_gradient_ = matmul_tn(features_, residuals);
}

void HoldoutCache::check_snapshot(const ModelSnapshot& snapshot) const {
    if (!(snapshot.model() == model_)) throw StateError("holdout cache was built against a different snapshot");
}

std::vector<ScoredCandidate> score_ours(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                        const HoldoutCache& holdout, const OursConfig& cfg) {
    if (cfg.inner_iterations < 0) throw ConfigError("inner_iterations must be >= 0");
    holdout.check_snapshot(snapshot);
    PoolView pool = build_pool_view(snapshot, pool_features);
    const int n = pool.features.rows();
    const int c = pool.logits.cols();

    // cross feature products against the holdout, N x |V|
    Matrix cross = matmul_nt(pool.features, holdout.features());

    std::vector<ScoredCandidate> out(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(c));
    for (int i = 0; i < n; ++i) {
        const double phi_sq = squared_norm(pool.features.row(i));
        const std::vector<double> offset = pseudo_label_offset(
            pool.logits.row(i), phi_sq, pool.pseudo_labels[static_cast<std::size_t>(i)], cfg.eta,
            cfg.inner_iterations);
        double total = 0.0;
        for (int j = 0; j < holdout.baseline_logits().rows(); ++j) {
            auto base = holdout.baseline_logits().row(j);
            const double s = cross(i, j);
            for (int k = 0; k < c; ++k) z[static_cast<std::size_t>(k)] = base[k] + s * offset[static_cast<std::size_t>(k)];
            total += xent_of_logits(z, holdout.labels()[static_cast<std::size_t>(j)]);
        }
        out[static_cast<std::size_t>(i)] = {i, total - holdout.baseline_total_loss(),
                                            pool.pseudo_labels[static_cast<std::size_t>(i)], std::nullopt};
    }
    return out;
}

std::vector<ScoredCandidate> score_ours_app(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                            const HoldoutCache& holdout) {
    holdout.check_snapshot(snapshot);
    PoolView pool = build_pool_view(snapshot, pool_features);
    const int n = pool.features.rows();
    const int c = pool.logits.cols();

    // u_i = phi_i^T * grad_v, so the score is -(u_i . residual_i)
    Matrix projected = matmul(pool.features, holdout.weight_gradient());

    std::vector<ScoredCandidate> out(static_cast<std::size_t>(n));
    std::vector<double> p(static_cast<std::size_t>(c));
    for (int i = 0; i < n; ++i) {
        auto z = pool.logits.row(i);
        std::copy(z.begin(), z.end(), p.begin());
        softmax_inplace(p);
        p[static_cast<std::size_t>(pool.pseudo_labels[static_cast<std::size_t>(i)])] -= 1.0;
        double score = 0.0;
        auto u = projected.row(i);
        for (int j = 0; j < c; ++j) score -= u[j] * p[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = {i, score, pool.pseudo_labels[static_cast<std::size_t>(i)], std::nullopt};
    }
    return out;
}

double kernel_value(const ModelSnapshot& snapshot, std::span<const double> x_i, int y_i,
                    std::span<const double> x_j, int y_j) {
    const MlpModel& model = snapshot.model();
    if (y_i < 0 || y_i >= model.num_classes() || y_j < 0 || y_j >= model.num_classes())
        throw LabelError("kernel_value: label out of range");
    const auto residual_and_features = [&](std::span<const double> x, int y) {
        Matrix input(1, static_cast<int>(x.size()), std::vector<double>(x.begin(), x.end()));
        Matrix phi = penultimate_features(model, input);
        std::vector<double> r(static_cast<std::size_t>(model.num_classes()));
        last_layer_logits(phi.row(0), model.weights().back(), model.biases().back(), r);
        softmax_inplace(r);
        r[static_cast<std::size_t>(y)] -= 1.0;
        return std::make_pair(std::move(phi), std::move(r));
    };
    auto [phi_i, r_i] = residual_and_features(x_i, y_i);
    auto [phi_j, r_j] = residual_and_features(x_j, y_j);

    double feature_dot = 0.0;
    for (int t = 0; t < phi_i.cols(); ++t) feature_dot += phi_i(0, t) * phi_j(0, t);
    double residual_dot = 0.0;
    for (std::size_t t = 0; t < r_i.size(); ++t) residual_dot += r_i[t] * r_j[t];
    return feature_dot * residual_dot;
}

std::vector<int> select_random(const std::vector<int>& pool_indices, int k, std::uint64_t seed) {
    if (k < 0 || k > static_cast<int>(pool_indices.size()))
        throw SelectionError("select_random: k out of range");
    Rng rng(derive_seed(seed, kRandomTag));
    std::vector<int> shuffled = pool_indices;
    rng.shuffle(shuffled);
    shuffled.resize(static_cast<std::size_t>(k));
    return shuffled;
}

std::vector<ScoredCandidate> score_entropy(const ModelSnapshot& snapshot, const Matrix& pool_features) {
    const Matrix probs = eval_probs(snapshot.model(), pool_features);
    const std::vector<int> pseudo = argmax_rows(probs);
    std::vector<ScoredCandidate> out(static_cast<std::size_t>(probs.rows()));
    for (int i = 0; i < probs.rows(); ++i)
        out[static_cast<std::size_t>(i)] = {i, entropy_of_probs(probs.row(i)), pseudo[static_cast<std::size_t>(i)],
                                            std::nullopt};
    return out;
}

namespace {

Matrix mean_of_passes(const std::vector<Matrix>& passes) {
    if (passes.size() == 1) return passes.front();
    Matrix mean(passes.front().rows(), passes.front().cols());
    for (const Matrix& pass : passes) mean.add_scaled(pass, 1.0 / static_cast<double>(passes.size()));
    return mean;
}

// A model without dropout produces identical passes, so one pass suffices
// and the degenerate identities (mc_dropout == entropy, bald == 0) hold
// exactly.
std::vector<Matrix> passes_for(const ModelSnapshot& snapshot, const Matrix& pool_features, int passes,
                               std::uint64_t seed) {
    const int effective = snapshot.model().dropout_rate() > 0.0 ? passes : 1;
    return mc_dropout_probs(snapshot.model(), pool_features, effective, derive_seed(seed, kDropoutTag));
}

}  // namespace

std::vector<double> predictive_entropy_of_passes(const std::vector<Matrix>& passes) {
    const Matrix mean = mean_of_passes(passes);
    std::vector<double> out(static_cast<std::size_t>(mean.rows()));
    for (int i = 0; i < mean.rows(); ++i) out[static_cast<std::size_t>(i)] = entropy_of_probs(mean.row(i));
    return out;
}

std::vector<double> bald_of_passes(const std::vector<Matrix>& passes) {
    std::vector<double> out = predictive_entropy_of_passes(passes);
    const double inv = 1.0 / static_cast<double>(passes.size());
    for (int i = 0; i < passes.front().rows(); ++i) {
        double mean_entropy = 0.0;
        for (const Matrix& pass : passes) mean_entropy += entropy_of_probs(pass.row(i)) * inv;
        out[static_cast<std::size_t>(i)] = std::max(0.0, out[static_cast<std::size_t>(i)] - mean_entropy);
    }
    return out;
}

std::vector<ScoredCandidate> score_mc_dropout(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                              int passes, std::uint64_t seed) {
    const std::vector<double> scores =
        predictive_entropy_of_passes(passes_for(snapshot, pool_features, passes, seed));
    const std::vector<int> pseudo = argmax_rows(eval_probs(snapshot.model(), pool_features));
    std::vector<ScoredCandidate> out(static_cast<std::size_t>(pool_features.rows()));
    for (int i = 0; i < pool_features.rows(); ++i)
        out[static_cast<std::size_t>(i)] = {i, scores[static_cast<std::size_t>(i)],
                                            pseudo[static_cast<std::size_t>(i)], std::nullopt};
    return out;
}

std::vector<ScoredCandidate> score_bald(const ModelSnapshot& snapshot, const Matrix& pool_features, int passes,
                                        std::uint64_t seed) {
    const std::vector<double> scores = bald_of_passes(passes_for(snapshot, pool_features, passes, seed));
    const std::vector<int> pseudo = argmax_rows(eval_probs(snapshot.model(), pool_features));
    std::vector<ScoredCandidate> out(static_cast<std::size_t>(pool_features.rows()));
    for (int i = 0; i < pool_features.rows(); ++i)
        out[static_cast<std::size_t>(i)] = {i, scores[static_cast<std::size_t>(i)],
                                            pseudo[static_cast<std::size_t>(i)], std::nullopt};
    return out;
}

std::vector<int> select_coreset_greedy(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                       const Matrix& train_features, int k) {
    if (k < 0 || k > pool_features.rows()) throw SelectionError("coreset: k out of range");
    const MlpModel& model = snapshot.model();
    const Matrix pool_phi = penultimate_features(model, pool_features);
    const int n = pool_phi.rows();

    std::vector<double> min_sq(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    if (train_features.rows() > 0) {
        const Matrix train_phi = penultimate_features(model, train_features);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < train_phi.rows(); ++j)
                min_sq[static_cast<std::size_t>(i)] =
                    std::min(min_sq[static_cast<std::size_t>(i)], squared_distance(pool_phi.row(i), train_phi.row(j)));
    }

    std::vector<int> selected;
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    for (int round = 0; round < k; ++round) {
        int best = -1;
        if (round == 0 && train_features.rows() == 0) {
            // nothing is covered yet: start from the most isolated pool point
            double best_val = -1.0;
            for (int i = 0; i < n; ++i) {
                double nearest = std::numeric_limits<double>::infinity();
                for (int j = 0; j < n; ++j)
                    if (j != i) nearest = std::min(nearest, squared_distance(pool_phi.row(i), pool_phi.row(j)));
                if (n == 1) nearest = 0.0;
                if (nearest > best_val) {
                    best_val = nearest;
                    best = i;
                }
            }
        } else {
            double best_val = -1.0;
            for (int i = 0; i < n; ++i) {
                if (chosen[static_cast<std::size_t>(i)]) continue;
                if (min_sq[static_cast<std::size_t>(i)] > best_val) {
                    best_val = min_sq[static_cast<std::size_t>(i)];
                    best = i;
                }
            }
        }
        chosen[static_cast<std::size_t>(best)] = true;
        selected.push_back(best);
        for (int i = 0; i < n; ++i)
            min_sq[static_cast<std::size_t>(i)] =
                std::min(min_sq[static_cast<std::size_t>(i)], squared_distance(pool_phi.row(i), pool_phi.row(best)));
    }
    return selected;
}

Matrix badge_embeddings(const ModelSnapshot& snapshot, const Matrix& pool_features) {
    PoolView pool = build_pool_view(snapshot, pool_features);
    const int n = pool.features.rows();
    const int d = pool.features.cols();
    const int c = pool.logits.cols();
    Matrix out(n, c * d);
    std::vector<double> p(static_cast<std::size_t>(c));
    for (int i = 0; i < n; ++i) {
        auto z = pool.logits.row(i);
        std::copy(z.begin(), z.end(), p.begin());
        softmax_inplace(p);
        p[static_cast<std::size_t>(pool.pseudo_labels[static_cast<std::size_t>(i)])] -= 1.0;
        auto phi = pool.features.row(i);
        auto g = out.row(i);
        for (int a = 0; a < c; ++a)
            for (int b = 0; b < d; ++b) g[static_cast<std::size_t>(a) * d + b] = p[static_cast<std::size_t>(a)] * phi[b];
    }
    return out;
}

std::vector<int> select_badge(const ModelSnapshot& snapshot, const Matrix& pool_features, int k,
                              std::uint64_t seed) {
    if (k < 0 || k > pool_features.rows()) throw SelectionError("badge: k out of range");
    PoolView pool = build_pool_view(snapshot, pool_features);
    const int n = pool.features.rows();
    const int c = pool.logits.cols();
    Rng rng(derive_seed(seed, kBadgeTag));

    // embedding g_i = residual_i (x) phi_i is handled in factored form:
    // |g_i|^2 = |r_i|^2 |phi_i|^2 and g_i.g_j = (r_i.r_j)(phi_i.phi_j)
    Matrix residuals(n, c);
    for (int i = 0; i < n; ++i) {
        auto z = pool.logits.row(i);
        auto r = residuals.row(i);
        std::copy(z.begin(), z.end(), r.begin());
        softmax_inplace(r);
        r[pool.pseudo_labels[static_cast<std::size_t>(i)]] -= 1.0;
    }
    std::vector<double> sq_norm(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        sq_norm[static_cast<std::size_t>(i)] = squared_norm(residuals.row(i)) * squared_norm(pool.features.row(i));
        total += sq_norm[static_cast<std::size_t>(i)];
    }
    if (total <= 0.0) {
        std::vector<int> positions(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) positions[static_cast<std::size_t>(i)] = i;
        return select_random(positions, k, seed);
    }

    std::vector<int> selected;
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    std::vector<double> weights = sq_norm;  // first draw ~ |g|^2
    std::vector<double> min_sq(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    for (int round = 0; round < k; ++round) {
        int pick = weighted_draw(weights, rng);
        if (pick < 0) {
            // all remaining mass is zero: fall back to a seeded uniform pick
            std::vector<int> open;
            for (int i = 0; i < n; ++i)
                if (!chosen[static_cast<std::size_t>(i)]) open.push_back(i);
            pick = open[static_cast<std::size_t>(rng.index(static_cast<int>(open.size())))];
        }
        chosen[static_cast<std::size_t>(pick)] = true;
        selected.push_back(pick);
        for (int i = 0; i < n; ++i) {
            double cross = 0.0;
            for (int j = 0; j < c; ++j) cross += residuals(i, j) * residuals(pick, j);
            double feat = 0.0;
            auto phi_i = pool.features.row(i);
            auto phi_p = pool.features.row(pick);
            for (int j = 0; j < pool.features.cols(); ++j) feat += phi_i[j] * phi_p[j];
            const double d2 = std::max(0.0, sq_norm[static_cast<std::size_t>(i)] +
                                                sq_norm[static_cast<std::size_t>(pick)] - 2.0 * cross * feat);
            min_sq[static_cast<std::size_t>(i)] = std::min(min_sq[static_cast<std::size_t>(i)], d2);
        }
        min_sq[static_cast<std::size_t>(pick)] = 0.0;
        for (int i = 0; i < n; ++i)
            weights[static_cast<std::size_t>(i)] = chosen[static_cast<std::size_t>(i)] ? 0.0 : min_sq[static_cast<std::size_t>(i)];
    }
    return selected;
}

std::vector<ScoredCandidate> score_err_reduction(const ModelSnapshot& snapshot, const Matrix& pool_features,
                                                 std::uint64_t pool_subset_seed, int subset_size,
                                                 const OursConfig& cfg) {
    if (subset_size < 1) throw ConfigError("err_reduction: subset_size must be >= 1");
    if (cfg.inner_iterations < 0) throw ConfigError("inner_iterations must be >= 0");
    PoolView pool = build_pool_view(snapshot, pool_features);
    const int n = pool.features.rows();
    const int c = pool.logits.cols();

    Rng rng(derive_seed(pool_subset_seed, kSubsetTag));
    const int m = std::min(subset_size, n);
    std::vector<int> subset = rng.sample_without_replacement(n, m);
    std::sort(subset.begin(), subset.end());

    const Matrix subset_phi = gather_rows(pool.features, subset);
    const Matrix subset_logits = gather_rows(pool.logits, subset);
    double baseline = 0.0;
    std::vector<double> p(static_cast<std::size_t>(c));
    for (int j = 0; j < m; ++j) {
        auto z = subset_logits.row(j);
        std::copy(z.begin(), z.end(), p.begin());
        softmax_inplace(p);
        baseline += entropy_of_probs(p) / m;
    }

    std::vector<ScoredCandidate> out(static_cast<std::size_t>(n));
    const int block = 256;
    std::vector<double> z(static_cast<std::size_t>(c));
    for (int start = 0; start < n; start += block) {
        const int stop = std::min(n, start + block);
        std::vector<int> rows(static_cast<std::size_t>(stop - start));
        for (int i = start; i < stop; ++i) rows[static_cast<std::size_t>(i - start)] = i;
        const Matrix cross = matmul_nt(gather_rows(pool.features, rows), subset_phi);
        for (int i = start; i < stop; ++i) {
            const double phi_sq = squared_norm(pool.features.row(i));
            const std::vector<double> offset =
                pseudo_label_offset(pool.logits.row(i), phi_sq, pool.pseudo_labels[static_cast<std::size_t>(i)],
                                    cfg.eta, cfg.inner_iterations);
            double updated = 0.0;
            for (int j = 0; j < m; ++j) {
                auto base = subset_logits.row(j);
                const double s = cross(i - start, j);
                for (int t = 0; t < c; ++t) z[static_cast<std::size_t>(t)] = base[t] + s * offset[static_cast<std::size_t>(t)];
                softmax_inplace(z);
                updated += entropy_of_probs(z) / m;
            }
            out[static_cast<std::size_t>(i)] = {i, baseline - updated, pool.pseudo_labels[static_cast<std::size_t>(i)],
                                                std::nullopt};
        }
    }
    return out;
}

std::vector<int> top_k(const std::vector<ScoredCandidate>& candidates, int k) {
    if (k < 0 || k > static_cast<int>(candidates.size())) throw SelectionError("top_k: k out of range");
    std::vector<const ScoredCandidate*> order(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) order[i] = &candidates[i];
    std::sort(order.begin(), order.end(), [](const ScoredCandidate* a, const ScoredCandidate* b) {
        if (a->score != b->score) return a->score > b->score;
        return a->pool_index < b->pool_index;
    });
    std::vector<int> out(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)]->pool_index;
    return out;
}

const std::vector<std::string>& strategy_ids() {
    static const std::vector<std::string> ids = {"random",  "entropy", "mc_dropout",    "bald", "coreset",
                                                 "badge",   "err_reduction", "ours", "ours_app"};
    return ids;
}

bool strategy_needs_holdout(const std::string& id) { return id == "ours" || id == "ours_app"; }

namespace {

std::string known_ids_message(const std::string& id) {
    std::string msg = "unknown strategy '" + id + "'; valid ids:";
    for (const std::string& s : strategy_ids()) msg += " " + s;
    return msg;
}

std::vector<int> dispatch(const std::string& id, const SelectionContext& ctx, const Matrix& features, int k,
                          const StrategyParams& params) {
    if (id == "random") {
        std::vector<int> positions(static_cast<std::size_t>(features.rows()));
        for (int i = 0; i < features.rows(); ++i) positions[static_cast<std::size_t>(i)] = i;
        return select_random(positions, k, ctx.seed);
    }
    if (id == "entropy") return top_k(score_entropy(ctx.snapshot, features), k);
    if (id == "mc_dropout") return top_k(score_mc_dropout(ctx.snapshot, features, params.mc_passes, ctx.seed), k);
    if (id == "bald") return top_k(score_bald(ctx.snapshot, features, params.mc_passes, ctx.seed), k);
    if (id == "coreset") {
        if (ctx.train_features == nullptr) throw StateError("coreset needs the training features");
        return select_coreset_greedy(ctx.snapshot, features, *ctx.train_features, k);
    }
    if (id == "badge") return select_badge(ctx.snapshot, features, k, ctx.seed);
    if (id == "err_reduction")
        return top_k(score_err_reduction(ctx.snapshot, features, ctx.seed, params.err_subset_size, params.ours), k);
    if (id == "ours" || id == "ours_app") {
        if (ctx.holdout == nullptr) throw StateError("'" + id + "' needs a holdout cache");
        if (id == "ours") return top_k(score_ours(ctx.snapshot, features, *ctx.holdout, params.ours), k);
        return top_k(score_ours_app(ctx.snapshot, features, *ctx.holdout), k);
    }
    throw ConfigError(known_ids_message(id));
}

}  // namespace

std::vector<int> select_with_strategy(const std::string& id, const SelectionContext& ctx, int k,
                                      const StrategyParams& params) {
    const int n = ctx.pool_features.rows();
    if (k > n) throw SelectionError("selection size exceeds pool size");
    if (params.pool_subsample > 0 && n > params.pool_subsample) {
        Rng rng(derive_seed(ctx.seed, kSubsampleTag));
        std::vector<int> positions = rng.sample_without_replacement(n, params.pool_subsample);
        std::sort(positions.begin(), positions.end());
        const Matrix sub = gather_rows(ctx.pool_features, positions);
        SelectionContext sub_ctx{ctx.snapshot, sub, ctx.train_features, ctx.holdout, ctx.seed};
        std::vector<int> picked = dispatch(id, sub_ctx, sub, k, params);
        for (int& p : picked) p = positions[static_cast<std::size_t>(p)];
        return picked;
    }
    return dispatch(id, ctx, ctx.pool_features, k, params);
}

}  // namespace alkit
