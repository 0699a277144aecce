#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wued/error.hpp"

namespace wued {

/// Dense row-major matrix of doubles. The single numeric carrier for
/// parameters, activations and gradients; column vectors are (n, 1).
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), data_(std::move(values)) {
        if (data_.size() != rows_ * cols_) {
            throw ShapeError("Matrix init: " + std::to_string(data_.size()) +
                             " values for shape " + shape_str());
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape " + a.shape_str() +
                         " vs " + b.shape_str());
    }
}

/// Standard matrix product, shape (a.rows, b.cols).
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + a.shape_str() + " x " + b.shape_str());
    }
    Matrix out(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    // ikj order keeps the b row contiguous in the inner loop.
    for (std::size_t i = 0; i < n; ++i) {
        double* out_row = out.data() + i * m;
        const double* a_row = a.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a_row[p];
            const double* b_row = b.data() + p * m;
            for (std::size_t j = 0; j < m; ++j) out_row[j] += av * b_row[j];
        }
    }
    return out;
}

/// a^T * b without materialising the transpose.
inline Matrix matmul_ta(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("matmul_ta: " + a.shape_str() + "^T x " + b.shape_str());
    }
    Matrix out(a.cols(), b.cols());
    const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
    for (std::size_t p = 0; p < k; ++p) {
        const double* a_row = a.data() + p * n;
        const double* b_row = b.data() + p * m;
        for (std::size_t i = 0; i < n; ++i) {
            double* out_row = out.data() + i * m;
            const double av = a_row[i];
            for (std::size_t j = 0; j < m; ++j) out_row[j] += av * b_row[j];
        }
    }
    return out;
}

/// Rank-1 update out += a * b^T for column vectors a (n,1) and b (m,1).
inline void add_outer(Matrix& out, const Matrix& a, const Matrix& b) {
    if (out.rows() != a.rows() || out.cols() != b.rows() ||
        a.cols() != 1 || b.cols() != 1) {
        throw ShapeError("add_outer: " + out.shape_str() + " += " +
                         a.shape_str() + " x " + b.shape_str() + "^T");
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* row = out.data() + i * out.cols();
        const double av = a.data()[i];
        for (std::size_t j = 0; j < b.rows(); ++j) row[j] += av * b.data()[j];
    }
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

inline void add_in_place(Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add_in_place");
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

inline void axpy(Matrix& a, double alpha, const Matrix& b) {
    require_same_shape(a, b, "axpy");
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += alpha * b.data()[i];
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
    return out;
}

inline Matrix scale(const Matrix& a, double s) {
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
    return out;
}

/// Stack two column vectors, a on top of b.
inline Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("vstack: " + a.shape_str() + " over " + b.shape_str());
    }
    Matrix out(a.rows() + b.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i];
    for (std::size_t i = 0; i < b.size(); ++i) out.data()[a.size() + i] = b.data()[i];
    return out;
}

/// Elementwise logistic function, stable for any finite input.
inline Matrix sigmoid(const Matrix& x) {
    Matrix out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = out.data()[i];
        if (v >= 0.0) {
            out.data()[i] = 1.0 / (1.0 + std::exp(-v));
        } else {
            const double e = std::exp(v);
            out.data()[i] = e / (1.0 + e);
        }
    }
    return out;
}

/// Elementwise hyperbolic tangent.
inline Matrix tanh_ew(const Matrix& x) {
    Matrix out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::tanh(out.data()[i]);
    return out;
}

/// Per-row softmax with max subtraction; each row sums to 1.
inline Matrix softmax_row(const Matrix& x) {
    Matrix out = x;
    if (x.cols() == 0) return out;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double* row = out.data() + r * x.cols();
        double mx = row[0];
        for (std::size_t c = 1; c < x.cols(); ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (std::size_t c = 0; c < x.cols(); ++c) row[c] /= sum;
    }
    return out;
}

} // namespace wued
