// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sift/errors.hpp"
#include "sift/linalg.hpp"
#include "sift/normal.hpp"
#include "sift/rng.hpp"

namespace sift {

/// Accuracy and budget knobs for the randomized QMC rectangle integrator.
struct QmcOptions {
    double abs_tol = 5e-4;             // requested absolute tolerance
    std::size_t n_shifts = 12;         // random-shift replicates for the error estimate
    std::size_t first_batch = 1024;    // points per shift in the first batch
    std::size_t max_points = 1 << 17;  // points per shift before giving up
    std::uint64_t seed = 0x5eed5eedcafef00dULL;
};

namespace detail {

inline const double* kronecker_roots(std::size_t need) {
    // sqrt(prime) generators of the Richtmyer sequence (reduced mod 1 at use)
    static const double roots[32] = {
        std::sqrt(2.0),   std::sqrt(3.0),   std::sqrt(5.0),   std::sqrt(7.0),
        std::sqrt(11.0),  std::sqrt(13.0),  std::sqrt(17.0),  std::sqrt(19.0),
        std::sqrt(23.0),  std::sqrt(29.0),  std::sqrt(31.0),  std::sqrt(37.0),
        std::sqrt(41.0),  std::sqrt(43.0),  std::sqrt(47.0),  std::sqrt(53.0),
        std::sqrt(59.0),  std::sqrt(61.0),  std::sqrt(67.0),  std::sqrt(71.0),
        std::sqrt(73.0),  std::sqrt(79.0),  std::sqrt(83.0),  std::sqrt(89.0),
        std::sqrt(97.0),  std::sqrt(101.0), std::sqrt(103.0), std::sqrt(107.0),
        std::sqrt(109.0), std::sqrt(113.0), std::sqrt(127.0), std::sqrt(131.0)};
    if (need > 32) throw ConfigError("mvn: dimension above the supported limit of 33");
    return roots;
}

/// One Genz separation-of-variables integrand evaluation at point w in [0,1)^{m-1}.
inline double genz_integrand(std::span<const double> lower, std::span<const double> upper,
                             const Matrix& chol, std::span<const double> w,
                             std::vector<double>& y) {
    const std::size_t m = lower.size();
    auto edge_cdf = [](double limit, double shift, double pivot) {
        if (std::isinf(limit)) return limit > 0.0 ? 1.0 : 0.0;
        const double z = limit - shift;
        if (pivot > 0.0) return norm_cdf(z / pivot);
        return z >= 0.0 ? 1.0 : 0.0; // degenerate direction: a step function
    };

    double d = edge_cdf(lower[0], 0.0, chol(0, 0));
    double e = edge_cdf(upper[0], 0.0, chol(0, 0));
    double f = e - d;
    for (std::size_t i = 1; i < m; ++i) {
        if (f <= 0.0) return 0.0;
        const double t = std::clamp(d + w[i - 1] * (e - d), 1e-300, 1.0 - 1e-16);
        y[i - 1] = norm_quantile(t);
        double shift = 0.0;
        for (std::size_t j = 0; j < i; ++j) shift += chol(i, j) * y[j];
        d = edge_cdf(lower[i], shift, chol(i, i));
        e = edge_cdf(upper[i], shift, chol(i, i));
        f *= (e - d);
    }
    return f;
}

} // namespace detail

/// P(lower <= X <= upper) for X ~ N(0, Sigma) given the Cholesky factor of Sigma.
/// Limits may be +-inf. Deterministic for a fixed options seed; throws
/// AccuracyError when the tolerance cannot be certified within the budget.
/// If err_out is non-null it receives the 3-sigma error estimate.
inline double mvn_rectangle(std::span<const double> lower, std::span<const double> upper,
                            const Matrix& chol, const QmcOptions& opts = {},
                            double* err_out = nullptr) {
    const std::size_t m = lower.size();
    if (m == 0) return 1.0;
    for (std::size_t i = 0; i < m; ++i)
        if (upper[i] <= lower[i]) return 0.0;

    if (m == 1) {
        const double hi = std::isinf(upper[0]) ? (upper[0] > 0 ? 1.0 : 0.0) : norm_cdf(upper[0] / chol(0, 0));
        const double lo = std::isinf(lower[0]) ? (lower[0] > 0 ? 1.0 : 0.0) : norm_cdf(lower[0] / chol(0, 0));
        if (err_out) *err_out = 0.0;
        return std::max(0.0, hi - lo);
    }

    const std::size_t k = m - 1;
    const double* roots = detail::kronecker_roots(k);

    Rng shift_rng(opts.seed);
    std::vector<std::vector<double>> shifts(opts.n_shifts, std::vector<double>(k));
    for (auto& s : shifts)
        for (auto& v : s) v = shift_rng.next_double();

    std::vector<double> sums(opts.n_shifts, 0.0);
    std::vector<double> w(k), y(k);
    std::size_t done = 0;
    std::size_t batch = opts.first_batch;

    while (true) {
        for (std::size_t s = 0; s < opts.n_shifts; ++s) {
            for (std::size_t idx = done; idx < done + batch; ++idx) {
                const auto kk = static_cast<double>(idx + 1);
                for (std::size_t j = 0; j < k; ++j) {
                    const double v = kk * roots[j] + shifts[s][j];
                    w[j] = v - std::floor(v);
                }
                sums[s] += detail::genz_integrand(lower, upper, chol, w, y);
            }
        }
        done += batch;

        double mean = 0.0;
        for (std::size_t s = 0; s < opts.n_shifts; ++s) mean += sums[s] / static_cast<double>(done);
        mean /= static_cast<double>(opts.n_shifts);
        double var = 0.0;
        for (std::size_t s = 0; s < opts.n_shifts; ++s) {
            const double d = sums[s] / static_cast<double>(done) - mean;
            var += d * d;
        }
        var /= static_cast<double>(opts.n_shifts - 1);
        const double err = 3.0 * std::sqrt(var / static_cast<double>(opts.n_shifts));

        if (err <= opts.abs_tol) {
            if (err_out) *err_out = err;
            return std::clamp(mean, 0.0, 1.0);
        }
        if (done >= opts.max_points) {
            throw AccuracyError("mvn_rectangle: tolerance " + std::to_string(opts.abs_tol) +
                                " not reached within " + std::to_string(done) +
                                " points per shift (estimate " + std::to_string(err) + ")");
        }
        batch = done; // double the point count each round
    }
}

} // namespace sift
