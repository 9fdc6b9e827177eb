// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sift/copula.hpp"
#include "sift/errors.hpp"
#include "sift/rng.hpp"

namespace sift {

/// Axis-aligned cell [lower, upper] inside the unit hypercube.
struct Hyperrectangle {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Probabilities of the 2^m corners of a cell. Bit j of a corner index is
/// the corner's label on axis j.
struct CornerDistribution {
    enum class Mode { exact, monte_carlo };

    std::vector<double> prob;
    Mode mode = Mode::exact;
    std::uint64_t mc_samples = 0; // conditioned-in-cell sample count (MC mode)
    double mc_tol = 0.0;          // 3-sigma worst-case tolerance (MC mode)

    std::size_t n_corners() const { return prob.size(); }

    /// Inverse-CDF draw of a corner index.
    std::size_t sample(Rng& rng) const {
        const double u = rng.next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < prob.size(); ++i) {
            acc += prob[i];
            if (u < acc) return i;
        }
        return prob.size() - 1;
    }
};

struct CornerOptions {
    std::size_t exact_dim_limit = 12;     // above this, fall back to Monte-Carlo
    double cdf_abs_tol = 1e-4;            // tolerance per copula CDF evaluation
    std::uint64_t mc_target_in_cell = 200000;
    std::uint64_t mc_max_draws = 20000000;
    std::uint64_t mc_seed = 0x11ce5ca1eULL;
};

namespace detail {

/// Exact corner masses by inclusion-exclusion: corner c owns the sub-box
/// between the cell midpoint and the corner, and its mass is the signed sum
/// of 2^m copula CDF evaluations. Evaluation points live on the {lower, mid,
/// upper} lattice, so they are memoized across corners (3^m instead of 4^m).
inline std::vector<double> exact_corner_masses(const DependenceModel& model, const Hyperrectangle& cell,
                                               const CornerOptions& opts) {
    const std::size_t m = model.dim();
    std::vector<double> mid(m);
    for (std::size_t j = 0; j < m; ++j) mid[j] = 0.5 * (cell.lower[j] + cell.upper[j]);

    std::unordered_map<std::uint64_t, double> memo;
    std::vector<double> u(m);
    auto cdf_at = [&](const std::vector<int>& which) { // 0=lower, 1=mid, 2=upper per axis
        std::uint64_t key = 0;
        for (std::size_t j = 0; j < m; ++j) key = key * 3 + static_cast<std::uint64_t>(which[j]);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        for (std::size_t j = 0; j < m; ++j)
            u[j] = which[j] == 0 ? cell.lower[j] : (which[j] == 1 ? mid[j] : cell.upper[j]);
        const double v = model.cdf(u, opts.cdf_abs_tol);
        memo.emplace(key, v);
        return v;
    };

    const std::size_t n_corners = std::size_t{1} << m;
    std::vector<double> mass(n_corners, 0.0);
    std::vector<int> which(m);
    for (std::size_t c = 0; c < n_corners; ++c) {
        double sum = 0.0;
        for (std::size_t v = 0; v < n_corners; ++v) {
            int low_picks = 0;
            for (std::size_t j = 0; j < m; ++j) {
                const bool hi_bit = (c >> j) & 1u;   // corner's half-box: [mid, upper] or [lower, mid]
                const bool top = (v >> j) & 1u;      // inclusion-exclusion vertex: box top or bottom
                if (top) {
                    which[j] = hi_bit ? 2 : 1;
                } else {
                    which[j] = hi_bit ? 1 : 0;
                    ++low_picks;
                }
            }
            const double term = cdf_at(which);
            sum += (low_picks % 2 == 0) ? term : -term;
        }
        mass[c] = sum;
    }
    return mass;
}

inline std::vector<double> mc_corner_masses(const DependenceModel& model, const Hyperrectangle& cell,
                                            const CornerOptions& opts, CornerDistribution& out) {
    const std::size_t m = model.dim();
    const std::size_t n_corners = std::size_t{1} << m;
    std::vector<double> counts(n_corners, 0.0);
    Rng rng(opts.mc_seed);
    std::vector<double> u(m);
    std::uint64_t in_cell = 0, draws = 0;
    while (in_cell < opts.mc_target_in_cell) {
        if (draws >= opts.mc_max_draws)
            throw AccuracyError("corner_distribution: Monte-Carlo budget exhausted after " +
                                std::to_string(draws) + " draws (" + std::to_string(in_cell) + " in cell)");
        model.residual().sample(rng, u);
        ++draws;
        bool inside = true;
        std::size_t corner = 0;
        for (std::size_t j = 0; j < m && inside; ++j) {
            if (u[j] < cell.lower[j] || u[j] > cell.upper[j]) inside = false;
            if (u[j] > 0.5 * (cell.lower[j] + cell.upper[j])) corner |= (std::size_t{1} << j);
        }
        if (!inside) continue;
        ++in_cell;
        counts[corner] += 1.0;
    }
    out.mc_samples = in_cell;
    out.mc_tol = 3.0 * std::sqrt(0.25 / static_cast<double>(in_cell));
    return counts;
}

} // namespace detail

/// Distribution of the cell's corners under the model: corner c is assigned
/// the copula mass of the sub-box between the midpoint and that corner,
/// normalized over the cell. Exact mode runs inclusion-exclusion over the
/// copula CDF; Monte-Carlo mode kicks in above the dimension limit.
inline CornerDistribution corner_distribution(const DependenceModel& model, const Hyperrectangle& cell,
                                              const CornerOptions& opts = {}) {
    const std::size_t m = model.dim();
    if (cell.lower.size() != m || cell.upper.size() != m)
        throw ConfigError("corner_distribution: cell dimension does not match the model");
    for (std::size_t j = 0; j < m; ++j)
        if (!(cell.lower[j] < cell.upper[j]))
            throw ConfigError("corner_distribution: degenerate cell on axis " + std::to_string(j));

    CornerDistribution dist;
    std::vector<double> mass;
    if (dynamic_cast<const IndependenceCopula*>(&model.residual()) != nullptr) {
        // The product copula factorizes per axis and both halves of an axis
        // carry equal mass, so the corner distribution is exactly uniform
        // regardless of dimension.
        dist.prob.assign(std::size_t{1} << m, 1.0 / static_cast<double>(std::size_t{1} << m));
        return dist;
    }
    if (m <= opts.exact_dim_limit) {
        dist.mode = CornerDistribution::Mode::exact;
        mass = detail::exact_corner_masses(model, cell, opts);
    } else {
        dist.mode = CornerDistribution::Mode::monte_carlo;
        mass = detail::mc_corner_masses(model, cell, opts, dist);
    }

    // Small negatives are QMC noise; anything beyond the stacked CDF
    // tolerance means the CDF itself missed its accuracy contract.
    const double neg_tol = dist.mode == CornerDistribution::Mode::exact
                               ? std::max(1e-9, 8.0 * opts.cdf_abs_tol * static_cast<double>(std::size_t{1} << m))
                               : 0.0;
    double total = 0.0;
    for (auto& v : mass) {
        if (v < -neg_tol)
            throw AccuracyError("corner_distribution: negative corner mass " + std::to_string(v) +
                                " exceeds tolerance; CDF accuracy insufficient");
        v = std::max(v, 0.0);
        total += v;
    }
    if (total <= 0.0)
        throw AccuracyError("corner_distribution: cell carries no probability mass");

    dist.prob.resize(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i) dist.prob[i] = mass[i] / total;
    return dist;
}

} // namespace sift
