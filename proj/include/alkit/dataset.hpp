#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alkit/matrix.hpp"

namespace alkit {

struct Dataset {
    Matrix features;          // N x D
    std::vector<int> labels;  // length N, values in [0, num_classes)
    int num_classes = 0;
    std::string name;

    int size() const { return features.rows(); }
    int dim() const { return features.cols(); }

    void validate() const;
};

// IDX ingestion (MNIST distribution format): big-endian magic 0x00000803 for
// images / 0x00000801 for labels, big-endian dimension sizes, raw bytes.
// Pixels are scaled to [0,1]; HxW images flatten row-major to D = H*W.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Comma-separated values, optional single header row, last column = integer
// class label, remaining columns real features.
Dataset load_csv(const std::string& path, bool has_header);

// Isotropic Gaussian cluster per class around a seeded random center.
Dataset make_blobs(int num_classes, const std::vector<int>& per_class_counts, int dim,
                   std::uint64_t centers_seed, double noise_sigma, std::uint64_t sample_seed);

// Rows of `extra` appended after `base`; label spaces must agree.
Dataset concat(const Dataset& base, const Dataset& extra);

}  // namespace alkit
