#include "alkit/split.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "alkit/errors.hpp"
#include "alkit/rng.hpp"

namespace alkit {

namespace {

constexpr std::uint64_t kSplitTag = 0x53504c49;     // "SPLI"
constexpr std::uint64_t kMinorityTag = 0x4d494e4f;  // "MINO"

struct ClassBuckets {
    std::vector<std::vector<int>> by_class;  // ascending index order
};

ClassBuckets bucket_non_test(const Dataset& dataset, const std::vector<bool>& is_test) {
    ClassBuckets buckets;
    buckets.by_class.resize(static_cast<std::size_t>(dataset.num_classes));
    for (int i = 0; i < dataset.size(); ++i)
        if (!is_test[static_cast<std::size_t>(i)])
            buckets.by_class[static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(i)])].push_back(i);
    return buckets;
}

std::vector<int> carve_test(const Dataset& dataset, const SplitSpec& spec, Rng& rng) {
    std::vector<int> test_idx;
    if (spec.external_test_count > 0) {
        if (spec.external_test_count > dataset.size())
            throw SplitError("external test count exceeds dataset size");
        for (int i = dataset.size() - spec.external_test_count; i < dataset.size(); ++i) test_idx.push_back(i);
        return test_idx;
    }
    if (spec.test_fraction < 0.0 || spec.test_fraction >= 1.0)
        throw SplitError("test_fraction must be in [0, 1)");
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(dataset.num_classes));
    for (int i = 0; i < dataset.size(); ++i)
        by_class[static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(i)])].push_back(i);
    for (auto& bucket : by_class) {
        const int take = static_cast<int>(std::lround(spec.test_fraction * static_cast<double>(bucket.size())));
        rng.shuffle(bucket);
        for (int i = 0; i < take; ++i) test_idx.push_back(bucket[static_cast<std::size_t>(i)]);
    }
    std::sort(test_idx.begin(), test_idx.end());
    return test_idx;
}

void take_per_class(std::vector<std::vector<int>>& buckets, const std::vector<int>& counts, Rng& rng,
                    std::vector<int>& out) {
    for (std::size_t c = 0; c < buckets.size(); ++c) {
        const int want = counts[c];
        if (want > static_cast<int>(buckets[c].size()))
            throw SplitError("insufficient population in class " + std::to_string(c) + ": need " +
                             std::to_string(want) + ", have " + std::to_string(buckets[c].size()));
        rng.shuffle(buckets[c]);
        out.insert(out.end(), buckets[c].begin(), buckets[c].begin() + want);
        buckets[c].erase(buckets[c].begin(), buckets[c].begin() + want);
        std::sort(buckets[c].begin(), buckets[c].end());
    }
    std::sort(out.begin(), out.end());
}

}  // namespace

std::vector<int> minority_classes_of(int num_classes, const ImbalanceSpec& imb, std::uint64_t seed) {
    const int count = imb.minority_class_count >= 0 ? imb.minority_class_count : num_classes / 2;
    if (count < 0 || count > num_classes) throw SplitError("minority class count out of range");
    switch (imb.choice) {
        case MinorityChoice::kExplicit: {
            for (int c : imb.minority_classes)
                if (c < 0 || c >= num_classes) throw SplitError("explicit minority class out of range");
            std::vector<int> sorted = imb.minority_classes;
            std::sort(sorted.begin(), sorted.end());
            return sorted;
        }
        case MinorityChoice::kSeededRandom: {
            Rng rng(derive_seed(seed, kMinorityTag));
            std::vector<int> chosen = rng.sample_without_replacement(num_classes, count);
            std::sort(chosen.begin(), chosen.end());
            return chosen;
        }
        case MinorityChoice::kLowerHalf:
        default: {
            std::vector<int> chosen;
            for (int c = 0; c < count; ++c) chosen.push_back(c);
            return chosen;
        }
    }
}

Split make_split(const Dataset& dataset, const SplitSpec& spec) {
    dataset.validate();
    if (spec.initial_per_class < 1) throw SplitError("initial_per_class must be >= 1");
    Rng rng(derive_seed(spec.seed, kSplitTag));

    Split split;
    split.test_idx = carve_test(dataset, spec, rng);
    std::vector<bool> is_test(static_cast<std::size_t>(dataset.size()), false);
    for (int i : split.test_idx) is_test[static_cast<std::size_t>(i)] = true;

    ClassBuckets buckets = bucket_non_test(dataset, is_test);
    const int holdout_pc = spec.holdout_per_class >= 0 ? spec.holdout_per_class : spec.initial_per_class;

    std::vector<int> train_counts(static_cast<std::size_t>(dataset.num_classes), spec.initial_per_class);
    std::vector<int> holdout_counts(static_cast<std::size_t>(dataset.num_classes), holdout_pc);
    take_per_class(buckets.by_class, train_counts, rng, split.train_idx);
    take_per_class(buckets.by_class, holdout_counts, rng, split.holdout_idx);

    for (const auto& bucket : buckets.by_class)
        split.pool_idx.insert(split.pool_idx.end(), bucket.begin(), bucket.end());
    std::sort(split.pool_idx.begin(), split.pool_idx.end());

    validate_split(split, dataset.size());
    return split;
}

Split make_imbalanced_split(const Dataset& dataset, const SplitSpec& spec, const ImbalanceSpec& imb) {
    dataset.validate();
    if (spec.initial_per_class < 1) throw SplitError("initial_per_class must be >= 1");
    if (imb.minority_fraction <= 0.0 || imb.minority_fraction > 1.0)
        throw SplitError("minority_fraction must be in (0, 1]");
    Rng rng(derive_seed(spec.seed, kSplitTag));

    const int num_classes = dataset.num_classes;
    const std::vector<int> minority = minority_classes_of(num_classes, imb, spec.seed);
    std::vector<bool> is_minority(static_cast<std::size_t>(num_classes), false);
    for (int c : minority) is_minority[static_cast<std::size_t>(c)] = true;

    Split split;
    split.test_idx = carve_test(dataset, spec, rng);
    std::vector<bool> is_test(static_cast<std::size_t>(dataset.size()), false);
    for (int i : split.test_idx) is_test[static_cast<std::size_t>(i)] = true;
    ClassBuckets buckets = bucket_non_test(dataset, is_test);

    // initial train: doubled majority base, minority at the configured fraction
    const int majority_train = imb.doubled_initial ? 2 * spec.initial_per_class : spec.initial_per_class;
    const int minority_train = static_cast<int>(std::lround(imb.minority_fraction * majority_train));
    std::vector<int> train_counts(static_cast<std::size_t>(num_classes));
    int initial_total = 0;
    for (int c = 0; c < num_classes; ++c) {
        train_counts[static_cast<std::size_t>(c)] = is_minority[static_cast<std::size_t>(c)] ? minority_train : majority_train;
        initial_total += train_counts[static_cast<std::size_t>(c)];
    }
    take_per_class(buckets.by_class, train_counts, rng, split.train_idx);

    // holdout: balanced, per class max(1, floor(ratio * initial / C)) unless forced
    int holdout_pc = spec.holdout_per_class;
    if (holdout_pc < 0) {
        const int holdout_total = static_cast<int>(std::lround(imb.holdout_to_initial_ratio * initial_total));
        holdout_pc = std::max(1, holdout_total / num_classes);
    }
    std::vector<int> holdout_counts(static_cast<std::size_t>(num_classes), holdout_pc);
    take_per_class(buckets.by_class, holdout_counts, rng, split.holdout_idx);

    // pool: equalize majority classes to the smallest remaining majority count
    int majority_base = -1;
    for (int c = 0; c < num_classes; ++c) {
        if (is_minority[static_cast<std::size_t>(c)]) continue;
        const int avail = static_cast<int>(buckets.by_class[static_cast<std::size_t>(c)].size());
        if (majority_base < 0 || avail < majority_base) majority_base = avail;
    }
    if (majority_base <= 0) throw SplitError("no samples left for the majority pool");
    const int minority_pool = static_cast<int>(std::lround(imb.minority_fraction * majority_base));
    std::vector<int> pool_counts(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c)
        pool_counts[static_cast<std::size_t>(c)] = is_minority[static_cast<std::size_t>(c)] ? minority_pool : majority_base;
    take_per_class(buckets.by_class, pool_counts, rng, split.pool_idx);

    validate_split(split, dataset.size());
    return split;
}

Split oracle_annotate(const Split& split, const std::vector<int>& selected_pool_indices) {
    std::set<int> pool(split.pool_idx.begin(), split.pool_idx.end());
    std::set<int> selected;
    for (int i : selected_pool_indices) {
        if (pool.count(i) == 0) throw SelectionError("selected index " + std::to_string(i) + " is not in the pool");
        if (!selected.insert(i).second)
            throw SelectionError("selected index " + std::to_string(i) + " appears twice");
    }
    Split out;
    out.holdout_idx = split.holdout_idx;
    out.test_idx = split.test_idx;
    out.train_idx = split.train_idx;
    out.train_idx.insert(out.train_idx.end(), selected.begin(), selected.end());
    std::sort(out.train_idx.begin(), out.train_idx.end());
    out.pool_idx.reserve(split.pool_idx.size() - selected.size());
    for (int i : split.pool_idx)
        if (selected.count(i) == 0) out.pool_idx.push_back(i);
    return out;
}

void validate_split(const Split& split, int dataset_size) {
    std::vector<bool> seen(static_cast<std::size_t>(dataset_size), false);
    const auto check = [&](const std::vector<int>& idx, const char* which) {
        for (int i : idx) {
            if (i < 0 || i >= dataset_size)
                throw SplitError(std::string(which) + " index out of range: " + std::to_string(i));
            if (seen[static_cast<std::size_t>(i)])
                throw SplitError(std::string(which) + " overlaps another partition at index " + std::to_string(i));
            seen[static_cast<std::size_t>(i)] = true;
        }
    };
    check(split.train_idx, "train");
    check(split.pool_idx, "pool");
    check(split.holdout_idx, "holdout");
    check(split.test_idx, "test");
}

}  // namespace alkit
