#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <vector>

#include "alkit/dataset.hpp"
#include "alkit/matrix.hpp"
#include "alkit/mlp.hpp"
#include "alkit/rng.hpp"

namespace testutil {

// independent triple-loop reference, deliberately unrelated to the library path
inline alkit::Matrix naive_matmul(const alkit::Matrix& a, const alkit::Matrix& b) {
    alkit::Matrix out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    return out;
}

inline bool close(double a, double b, double rtol, double atol = 1e-8) {
    return std::abs(a - b) <= rtol * std::max(std::abs(a), std::abs(b)) + atol;
}

// central finite difference of `loss` with respect to a single parameter
inline double central_diff(const std::function<double()>& loss, double& param, double h = 1e-5) {
    const double saved = param;
    param = saved + h;
    const double up = loss();
    param = saved - h;
    const double down = loss();
    param = saved;
    return (up - down) / (2.0 * h);
}

inline std::vector<double> ranks_with_ties(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::vector<double> rx = ranks_with_ties(xs);
    const std::vector<double> ry = ranks_with_ties(ys);
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i] / n;
        my += ry[i] / n;
    }
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline void write_be_u32(std::ofstream& out, std::uint32_t value) {
    const unsigned char buf[4] = {static_cast<unsigned char>(value >> 24), static_cast<unsigned char>(value >> 16),
                                  static_cast<unsigned char>(value >> 8), static_cast<unsigned char>(value)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

// minimal valid IDX pair for loader tests
inline void write_idx_pair(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                           int n, int height, int width, const std::vector<unsigned char>& pixels,
                           const std::vector<unsigned char>& labels) {
    std::ofstream images(images_path, std::ios::binary);
    write_be_u32(images, 0x00000803);
    write_be_u32(images, static_cast<std::uint32_t>(n));
    write_be_u32(images, static_cast<std::uint32_t>(height));
    write_be_u32(images, static_cast<std::uint32_t>(width));
    images.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    std::ofstream out_labels(labels_path, std::ios::binary);
    write_be_u32(out_labels, 0x00000801);
    write_be_u32(out_labels, static_cast<std::uint32_t>(n));
    out_labels.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

inline alkit::Matrix random_matrix(int rows, int cols, alkit::Rng& rng, double lo = -1.0, double hi = 1.0) {
    alkit::Matrix out(rows, cols);
    for (double& v : out.storage()) v = rng.uniform(lo, hi);
    return out;
}

// Default-constructed models carry zero biases, which parks rectifier
// pre-activations exactly on the kink for all-negative rows; generic
// positions keep finite differences well-defined.
inline void randomize_biases(alkit::MlpModel& model, alkit::Rng& rng, double scale = 0.3) {
    for (alkit::Matrix& b : model.biases())
        for (double& v : b.storage()) v = rng.uniform(-scale, scale);
}

inline std::vector<int> random_labels(int n, int num_classes, alkit::Rng& rng) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int& y : out) y = rng.index(num_classes);
    return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / ("alkit_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testutil
