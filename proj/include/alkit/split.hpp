#pragma once

#include <cstdint>
#include <vector>

#include "alkit/dataset.hpp"

namespace alkit {

// Disjoint index partition of a dataset. Pool labels are hidden by
// construction: strategies only ever receive feature matrices, and labels
// for pool samples are released by oracle_annotate moving them into train.
struct Split {
    std::vector<int> train_idx;
    std::vector<int> pool_idx;
    std::vector<int> holdout_idx;
    std::vector<int> test_idx;
};

struct SplitSpec {
    int initial_per_class = 5;
    // -1 keeps the balanced default (equal to initial_per_class) or the
    // imbalanced ratio rule; >= 0 forces an explicit per-class holdout size.
    int holdout_per_class = -1;
    double test_fraction = 0.2;   // stratified carve when no external test set
    int external_test_count = 0;  // trailing rows forming an official test split
    std::uint64_t seed = 0;
};

enum class MinorityChoice { kLowerHalf, kSeededRandom, kExplicit };

struct ImbalanceSpec {
    double minority_fraction = 0.1;
    MinorityChoice choice = MinorityChoice::kLowerHalf;
    std::vector<int> minority_classes;  // used when choice == kExplicit
    int minority_class_count = -1;      // default: half of the classes
    bool doubled_initial = true;
    double holdout_to_initial_ratio = 0.2;
};

// Stratified seeded split; holdout matches the initial training size unless
// overridden, everything left after the test carve-out becomes the pool.
Split make_split(const Dataset& dataset, const SplitSpec& spec);

// Pool and initial train subsample minority classes to minority_fraction of
// the majority per-class count; holdout stays balanced.
Split make_imbalanced_split(const Dataset& dataset, const SplitSpec& spec, const ImbalanceSpec& imb);

// Moves the selected indices from pool to train, revealing their labels.
Split oracle_annotate(const Split& split, const std::vector<int>& selected_pool_indices);

// Which classes the imbalanced protocol under-represents.
std::vector<int> minority_classes_of(int num_classes, const ImbalanceSpec& imb, std::uint64_t seed);

void validate_split(const Split& split, int dataset_size);

}  // namespace alkit
