#pragma once

// Dense row-major real matrix for small dimensions (d <= 32).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "swicert/error.hpp"

namespace swicert {

class RealMatrix {
public:
    RealMatrix() = default;

    RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0)
            fail(ErrorKind::Dimension, "matrix dimensions must be positive");
    }

    RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (rows == 0 || cols == 0)
            fail(ErrorKind::Dimension, "matrix dimensions must be positive");
        if (data_.size() != rows * cols)
            fail(ErrorKind::Dimension, "entry count " + std::to_string(data_.size()) + " != " +
                                           std::to_string(rows) + "x" + std::to_string(cols));
        for (double v : data_)
            if (!std::isfinite(v)) fail(ErrorKind::Domain, "matrix entries must be finite");
    }

    RealMatrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        if (rows_ == 0 || cols_ == 0) fail(ErrorKind::Dimension, "empty matrix literal");
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) fail(ErrorKind::Dimension, "ragged matrix literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
        for (double v : data_)
            if (!std::isfinite(v)) fail(ErrorKind::Domain, "matrix entries must be finite");
    }

    static RealMatrix identity(std::size_t n) {
        RealMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static RealMatrix diagonal(std::span<const double> d) {
        RealMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }
    [[nodiscard]] std::span<const double> entries() const noexcept { return data_; }
    [[nodiscard]] std::span<double> entries() noexcept { return data_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] RealMatrix transpose() const {
        RealMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    RealMatrix& operator+=(const RealMatrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    RealMatrix& operator-=(const RealMatrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    RealMatrix& operator*=(double s) noexcept {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend RealMatrix operator+(RealMatrix a, const RealMatrix& b) { return a += b; }
    friend RealMatrix operator-(RealMatrix a, const RealMatrix& b) { return a -= b; }
    friend RealMatrix operator*(RealMatrix a, double s) { return a *= s; }
    friend RealMatrix operator*(double s, RealMatrix a) { return a *= s; }
    friend RealMatrix operator-(RealMatrix a) { return a *= -1.0; }

    friend RealMatrix operator*(const RealMatrix& a, const RealMatrix& b) {
        if (a.cols_ != b.rows_) fail(ErrorKind::Dimension, "inner dimensions differ in product");
        RealMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend bool operator==(const RealMatrix&, const RealMatrix&) = default;

private:
    void check_same_shape(const RealMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) fail(ErrorKind::Dimension, "shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Vector = std::vector<double>;

inline Vector operator*(const RealMatrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) fail(ErrorKind::Dimension, "matrix-vector dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

/// <P x, x>
inline double quadratic_form(const RealMatrix& p, std::span<const double> x) {
    return dot(p * x, x);
}

inline double frobenius_norm(const RealMatrix& a) { return norm2(a.entries()); }

inline double max_abs(const RealMatrix& a) {
    double m = 0.0;
    for (double v : a.entries()) m = std::max(m, std::abs(v));
    return m;
}

/// Induced 1-norm (max column sum).
inline double norm1(const RealMatrix& a) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
        m = std::max(m, s);
    }
    return m;
}

inline RealMatrix symmetrize(const RealMatrix& a) {
    RealMatrix s = a + a.transpose();
    s *= 0.5;
    return s;
}

/// max |a_ij - a_ji| / max |a_ij|; zero for the zero matrix.
inline double relative_asymmetry(const RealMatrix& a) {
    const double scale = max_abs(a);
    if (scale == 0.0) return 0.0;
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - a(j, i)));
    return m / scale;
}

/// Eigenvalues of a square matrix. Symmetric sources are real and sorted ascending.
struct Spectrum {
    std::vector<std::complex<double>> values;
    bool is_real_symmetric_source = false;

    [[nodiscard]] double max_real() const {
        double m = -INFINITY;
        for (auto v : values) m = std::max(m, v.real());
        return m;
    }
    [[nodiscard]] double min_real() const {
        double m = INFINITY;
        for (auto v : values) m = std::min(m, v.real());
        return m;
    }
};

} // namespace swicert
