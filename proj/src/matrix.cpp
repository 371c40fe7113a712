#include "alkit/matrix.hpp"

#include <Eigen/Core>
#include <cmath>

#include "alkit/errors.hpp"

namespace alkit {

namespace {

using EigenMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using EigenMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

EigenMap map(const Matrix& m) { return {m.data(), m.rows(), m.cols()}; }

}  // namespace

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw DimensionError("matrix dimensions must be non-negative");
}

Matrix::Matrix(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(rows) * cols)
        throw DimensionError("matrix data length does not equal rows*cols");
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Matrix::fill(double value) {
    for (double& v : data_) v = value;
}

void Matrix::add_scaled(const Matrix& other, double factor) {
    if (!same_shape(other)) throw DimensionError("add_scaled: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += factor * other.data_[i];
}

void Matrix::scale(double factor) {
    for (double& v : data_) v *= factor;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    EigenMutMap{out.data(), out.rows(), out.cols()} = map(a) * map(b);
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionError("matmul_tn: row counts differ");
    Matrix out(a.cols(), b.cols());
    EigenMutMap{out.data(), out.rows(), out.cols()} = map(a).transpose() * map(b);
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionError("matmul_nt: column counts differ");
    Matrix out(a.rows(), b.rows());
    EigenMutMap{out.data(), out.rows(), out.cols()} = map(a) * map(b).transpose();
    return out;
}

double dot(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionError("dot: shape mismatch");
    double acc = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) acc += pa[i] * pb[i];
    return acc;
}

Matrix gather_rows(const Matrix& src, const std::vector<int>& indices) {
    Matrix out(static_cast<int>(indices.size()), src.cols());
    for (int r = 0; r < out.rows(); ++r) {
        const int s = indices[static_cast<std::size_t>(r)];
        if (s < 0 || s >= src.rows()) throw DimensionError("gather_rows: index out of range");
        auto from = src.row(s);
        auto to = out.row(r);
        std::copy(from.begin(), from.end(), to.begin());
    }
    return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("squared_distance: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace alkit
