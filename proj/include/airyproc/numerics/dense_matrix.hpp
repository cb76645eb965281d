#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace airyproc::numerics {

/// Row-major dense matrix.
template <class T>
class BasicMatrix {
public:
    BasicMatrix() = default;
    BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static BasicMatrix identity(std::size_t n) {
        BasicMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using DenseMatrix = BasicMatrix<double>;
using ComplexMatrix = BasicMatrix<std::complex<double>>;

template <class T>
BasicMatrix<T> multiply(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("multiply: shape mismatch");
    BasicMatrix<T> c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T aik = a(i, k);
            auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

/// a * b^T for real matrices (rows of both operands are contiguous).
inline BasicMatrix<double> multiply_transposed(const BasicMatrix<double>& a, const BasicMatrix<double>& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("multiply_transposed: shape mismatch");
    BasicMatrix<double> c(a.rows(), b.rows());
    const std::size_t k = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i).data();
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* bj = b.row(j).data();
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
            c(i, j) = s;
        }
    }
    return c;
}

/// Conjugate transpose (plain transpose for real matrices).
template <class T>
BasicMatrix<T> adjoint(const BasicMatrix<T>& a) {
    BasicMatrix<T> r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if constexpr (std::is_same_v<T, double>)
                r(j, i) = a(i, j);
            else
                r(j, i) = std::conj(a(i, j));
        }
    return r;
}

struct LogDet {
    double log_abs_det = 0.0;
    int sign = 0;  ///< +1, -1, or 0 when singular to working precision

    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs_det); }
};

/**
 * log|det M| and sign(det M) by LU factorization with partial pivoting.
 * The matrix is taken by value and factored in place.
 */
inline LogDet lu_log_det(DenseMatrix m) {
    if (!m.square()) throw std::invalid_argument("lu_log_det: matrix must be square");
    const std::size_t n = m.rows();
    LogDet out{0.0, 1};
    double scale = 0.0;
    for (double v : m.data()) scale = std::max(scale, std::fabs(v));
    const double tiny = scale * static_cast<double>(n) * 1e-16;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::fabs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::fabs(m(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (!(best > tiny)) return {0.0, 0};
        if (p != k) {
            auto rk = m.row(k);
            auto rp = m.row(p);
            std::swap_ranges(rk.begin(), rk.end(), rp.begin());
            out.sign = -out.sign;
        }
        const double pivot = m(k, k);
        if (pivot < 0) out.sign = -out.sign;
        out.log_abs_det += std::log(std::fabs(pivot));
        auto rk = m.row(k);
        for (std::size_t i = k + 1; i < n; ++i) {
            auto ri = m.row(i);
            const double f = ri[k] / pivot;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) ri[j] -= f * rk[j];
        }
    }
    return out;
}

}  // namespace airyproc::numerics
