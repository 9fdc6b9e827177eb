// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace sift {

/// Dense row-major square matrix; just enough linear algebra for correlation
/// matrices of a few dozen factors.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t dim() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    bool is_identity(double tol = 0.0) const {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (std::fabs((*this)(i, j) - (i == j ? 1.0 : 0.0)) > tol) return false;
        return true;
    }

    Matrix submatrix(const std::vector<std::size_t>& keep) const {
        Matrix m(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i)
            for (std::size_t j = 0; j < keep.size(); ++j) m(i, j) = (*this)(keep[i], keep[j]);
        return m;
    }

    const std::vector<double>& data() const { return data_; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Cholesky factor of a symmetric positive semi-definite matrix (lower
/// triangular, zero columns where the pivot vanishes). Returns nullopt when
/// the matrix is indefinite beyond tolerance.
inline std::optional<Matrix> cholesky_psd(const Matrix& a, double tol = 1e-10) {
    const std::size_t n = a.dim();
    Matrix l(n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d < -tol) return std::nullopt;
        l(j, j) = d > tol ? std::sqrt(d) : 0.0;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (l(j, j) > 0.0) {
                l(i, j) = s / l(j, j);
            } else {
                // Zero pivot: the row must be linearly dependent, anything
                // left over means the matrix is not PSD.
                if (std::fabs(s) > tol) return std::nullopt;
                l(i, j) = 0.0;
            }
        }
    }
    return l;
}

} // namespace sift
