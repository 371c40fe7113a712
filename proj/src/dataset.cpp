#include "alkit/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "alkit/errors.hpp"
#include "alkit/rng.hpp"

namespace alkit {

void Dataset::validate() const {
    if (size() < 1 || dim() < 1) throw DimensionError("dataset must have N >= 1 and D >= 1");
    if (static_cast<int>(labels.size()) != size()) throw LabelError("dataset label count does not match N");
    for (int y : labels)
        if (y < 0 || y >= num_classes) throw LabelError("dataset label out of range [0, num_classes)");
}

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw IoError("truncated IDX file: " + path);
    return (static_cast<std::uint32_t>(buf[0]) << 24) | (static_cast<std::uint32_t>(buf[1]) << 16) |
           (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    return in;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream images = open_binary(images_path);
    if (read_be_u32(images, images_path) != kImagesMagic)
        throw IoError("bad magic number in IDX image file: " + images_path);
    const std::uint32_t n_images = read_be_u32(images, images_path);
    const std::uint32_t height = read_be_u32(images, images_path);
    const std::uint32_t width = read_be_u32(images, images_path);

    std::ifstream labels = open_binary(labels_path);
    if (read_be_u32(labels, labels_path) != kLabelsMagic)
        throw IoError("bad magic number in IDX label file: " + labels_path);
    const std::uint32_t n_labels = read_be_u32(labels, labels_path);
    if (n_images != n_labels)
        throw IoError("IDX image/label count mismatch: " + std::to_string(n_images) + " images vs " +
                      std::to_string(n_labels) + " labels");

    const std::size_t dim = static_cast<std::size_t>(height) * width;
    Dataset out;
    out.features = Matrix(static_cast<int>(n_images), static_cast<int>(dim));
    out.labels.resize(n_images);
    out.name = "idx";

    std::vector<unsigned char> pixel_row(dim);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        images.read(reinterpret_cast<char*>(pixel_row.data()), static_cast<std::streamsize>(dim));
        if (!images) throw IoError("truncated IDX file: " + images_path);
        auto row = out.features.row(static_cast<int>(i));
        for (std::size_t j = 0; j < dim; ++j) row[j] = static_cast<double>(pixel_row[j]) / 255.0;
    }
    std::vector<unsigned char> raw_labels(n_labels);
    labels.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(n_labels));
    if (!labels) throw IoError("truncated IDX file: " + labels_path);

    int max_label = 0;
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        out.labels[i] = static_cast<int>(raw_labels[i]);
        max_label = std::max(max_label, out.labels[i]);
    }
    out.num_classes = max_label + 1;
    out.validate();
    return out;
}

namespace {

double parse_real(const std::string& cell, int line_no) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(cell, &consumed);
    } catch (const std::exception&) {
        throw ParseError("non-numeric cell '" + cell + "' at line " + std::to_string(line_no));
    }
    while (consumed < cell.size() && std::isspace(static_cast<unsigned char>(cell[consumed]))) ++consumed;
    if (consumed != cell.size())
        throw ParseError("non-numeric cell '" + cell + "' at line " + std::to_string(line_no));
    return value;
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Dataset load_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t n_cols = 0;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && has_header) continue;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_cells(line);
        if (cells.size() < 2) throw ParseError("row with fewer than 2 columns at line " + std::to_string(line_no));
        if (n_cols == 0) n_cols = cells.size();
        if (cells.size() != n_cols)
            throw ParseError("ragged row (" + std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(n_cols) + ") at line " + std::to_string(line_no));
        std::vector<double> row(n_cols - 1);
        for (std::size_t j = 0; j + 1 < n_cols; ++j) row[j] = parse_real(cells[j], line_no);
        const double label_real = parse_real(cells.back(), line_no);
        const int label = static_cast<int>(label_real);
        if (static_cast<double>(label) != label_real || label < 0)
            throw ParseError("label column must be a non-negative integer at line " + std::to_string(line_no));
        rows.push_back(std::move(row));
        labels.push_back(label);
    }
    if (rows.empty()) throw ParseError("no data rows in " + path);

    Dataset out;
    out.features = Matrix(static_cast<int>(rows.size()), static_cast<int>(n_cols - 1));
    for (int i = 0; i < out.features.rows(); ++i) {
        auto dst = out.features.row(i);
        std::copy(rows[static_cast<std::size_t>(i)].begin(), rows[static_cast<std::size_t>(i)].end(), dst.begin());
    }
    out.labels = std::move(labels);
    out.num_classes = *std::max_element(out.labels.begin(), out.labels.end()) + 1;
    out.name = "csv";
    out.validate();
    return out;
}

Dataset make_blobs(int num_classes, const std::vector<int>& per_class_counts, int dim,
                   std::uint64_t centers_seed, double noise_sigma, std::uint64_t sample_seed) {
    if (dim < 2) throw ConfigError("make_blobs: dim must be >= 2");
    if (num_classes < 1 || static_cast<int>(per_class_counts.size()) != num_classes)
        throw ConfigError("make_blobs: per_class_counts must list one count per class");

    Rng center_rng(centers_seed);
    Matrix centers(num_classes, dim);
    for (int c = 0; c < num_classes; ++c)
        for (int j = 0; j < dim; ++j) centers(c, j) = center_rng.uniform(-10.0, 10.0);

    int total = 0;
    for (int c : per_class_counts) {
        if (c < 1) throw ConfigError("make_blobs: per-class count must be >= 1");
        total += c;
    }

    Dataset out;
    out.features = Matrix(total, dim);
    out.labels.resize(static_cast<std::size_t>(total));
    out.num_classes = num_classes;
    out.name = "blobs";

    Rng sample_rng(sample_seed);
    int row = 0;
    for (int c = 0; c < num_classes; ++c) {
        for (int k = 0; k < per_class_counts[static_cast<std::size_t>(c)]; ++k, ++row) {
            auto dst = out.features.row(row);
            for (int j = 0; j < dim; ++j) dst[j] = centers(c, j) + noise_sigma * sample_rng.normal();
            out.labels[static_cast<std::size_t>(row)] = c;
        }
    }
    out.validate();
    return out;
}

Dataset concat(const Dataset& base, const Dataset& extra) {
    if (base.dim() != extra.dim()) throw DimensionError("concat: feature widths differ");
    Dataset out;
    out.features = Matrix(base.size() + extra.size(), base.dim());
    std::copy(base.features.storage().begin(), base.features.storage().end(), out.features.storage().begin());
    std::copy(extra.features.storage().begin(), extra.features.storage().end(),
              out.features.storage().begin() + base.features.size());
    out.labels = base.labels;
    out.labels.insert(out.labels.end(), extra.labels.begin(), extra.labels.end());
    out.num_classes = std::max(base.num_classes, extra.num_classes);
    out.name = base.name;
    out.validate();
    return out;
}

}  // namespace alkit
