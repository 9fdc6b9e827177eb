// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "sift/copula.hpp"
#include "sift/corner.hpp"
#include "sift/errors.hpp"
#include "sift/grid.hpp"
#include "sift/rng.hpp"

namespace sift {

/// Rank statistics of a sample set: r[i][j] is the 1-based rank of sample i
/// among all samples in dimension j. Ties are broken by sample index, so
/// duplicated values keep a stable order.
struct RankStatistics {
    std::vector<std::vector<int>> r;
};

inline RankStatistics rank_stats(const std::vector<std::vector<double>>& samples) {
    const std::size_t l = samples.size();
    if (l == 0) return {};
    const std::size_t m = samples[0].size();
    RankStatistics stats;
    stats.r.assign(l, std::vector<int>(m, 0));
    std::vector<std::size_t> order(l);
    for (std::size_t j = 0; j < m; ++j) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (samples[a][j] != samples[b][j]) return samples[a][j] < samples[b][j];
            return a < b;
        });
        for (std::size_t pos = 0; pos < l; ++pos) stats.r[order[pos]][j] = static_cast<int>(pos) + 1;
    }
    return stats;
}

/// Which corner distribution a plan uses for every block.
enum class CornerMode {
    per_cell, // computed for each sampled block (default)
    shared    // computed once on the full cube and reused for every block
};

inline std::string to_string(CornerMode m) { return m == CornerMode::per_cell ? "per_cell" : "shared"; }

struct PlanOptions {
    CornerMode corner_mode = CornerMode::per_cell;
    CornerOptions corner;
};

/// Block selection, step 1 of the path decomposition: copula samples are
/// rank-rearranged per round (latin hypercube sampling with dependence), so
/// within each round of l = p-s samples every block origin index occurs
/// exactly once per dimension. Rounds repeat until `count` origins exist;
/// the excess of the final round is discarded.
inline std::vector<BlockOrigin> lhsd_blocks(const DependenceModel& model, const GridConfig& cfg,
                                            std::size_t count, Rng& rng) {
    const auto l = static_cast<std::size_t>(cfg.origins_per_axis());
    if (l < 1) throw ConfigError("lhsd_blocks: no valid block origins (s >= p)");
    std::vector<BlockOrigin> origins;
    origins.reserve(count);
    while (origins.size() < count) {
        const auto samples = model.sample(l, rng);
        const auto ranks = rank_stats(samples);
        for (std::size_t i = 0; i < l && origins.size() < count; ++i) {
            BlockOrigin o;
            o.levels.resize(model.dim());
            for (std::size_t j = 0; j < model.dim(); ++j) o.levels[j] = ranks.r[i][j] - 1;
            origins.push_back(std::move(o));
        }
    }
    return origins;
}

/// The block's extent in unit-cube coordinates: [o/(p-1), (o+s)/(p-1)] per axis.
inline Hyperrectangle block_rect(const GridConfig& cfg, const BlockOrigin& origin) {
    Hyperrectangle rect;
    rect.lower.resize(origin.levels.size());
    rect.upper.resize(origin.levels.size());
    const double denom = cfg.p - 1;
    for (std::size_t j = 0; j < origin.levels.size(); ++j) {
        rect.lower[j] = origin.levels[j] / denom;
        rect.upper[j] = (origin.levels[j] + cfg.s) / denom;
    }
    return rect;
}

/// Step 2: draw the starting corner of a block from its corner distribution.
/// The path will end at the bitwise negation of the returned code.
inline CornerCode sample_start_corner(const DependenceModel& model, const GridConfig& cfg,
                                      const BlockOrigin& block, Rng& rng, const CornerOptions& opts = {}) {
    const CornerDistribution dist = corner_distribution(model, block_rect(cfg, block), opts);
    return corner_code(dist.sample(rng), model.dim());
}

/// A full screening design: r elementary paths over the m effective factors,
/// a pure function of (model, cfg, r, seed).
struct SamplingPlan {
    GridConfig cfg;
    std::size_t r = 0;
    std::uint64_t seed = 0;
    CornerMode corner_mode = CornerMode::per_cell;
    std::vector<ElementaryPath> paths;

    std::size_t n_evaluation_points() const { return paths.size() * (static_cast<std::size_t>(cfg.n_factors) + 1); }

    /// Plan points in path-major order (path i, point k -> index i*(n+1)+k).
    std::vector<GridPoint> evaluation_points() const {
        std::vector<GridPoint> pts;
        pts.reserve(n_evaluation_points());
        for (const auto& path : paths)
            for (const auto& pt : path.points) pts.push_back(pt);
        return pts;
    }
};

/// Assemble r paths: LHSD block selection, copula-weighted corner selection,
/// then a uniformly random traversal permutation per path. Under the
/// independence copula every stage is uniform and the construction reduces
/// to the classic Morris design.
inline SamplingPlan build_plan(const DependenceModel& model, const GridConfig& cfg, std::size_t r,
                               std::uint64_t seed, const PlanOptions& opts = {}) {
    if (static_cast<std::size_t>(cfg.n_factors) != model.dim())
        throw ConfigError("build_plan: grid n_factors (" + std::to_string(cfg.n_factors) +
                          ") does not match the number of effective factors (" + std::to_string(model.dim()) + ")");
    if (r < 1) throw ConfigError("build_plan: path count r must be >= 1");

    SamplingPlan plan{cfg, r, seed, opts.corner_mode, {}};
    Rng rng(seed);

    const auto origins = lhsd_blocks(model, cfg, r, rng);

    // Corner distributions repeat across blocks; cache them by origin.
    std::map<std::vector<int>, CornerDistribution> dist_cache;
    const auto m = static_cast<std::size_t>(cfg.n_factors);
    auto distribution_for = [&](const BlockOrigin& origin) -> const CornerDistribution& {
        std::vector<int> key = opts.corner_mode == CornerMode::shared ? std::vector<int>{} : origin.levels;
        auto it = dist_cache.find(key);
        if (it != dist_cache.end()) return it->second;
        Hyperrectangle rect = opts.corner_mode == CornerMode::shared
                                  ? Hyperrectangle{std::vector<double>(m, 0.0), std::vector<double>(m, 1.0)}
                                  : block_rect(cfg, origin);
        return dist_cache.emplace(std::move(key), corner_distribution(model, rect, opts.corner)).first->second;
    };

    std::vector<CornerCode> starts;
    starts.reserve(r);
    for (const auto& origin : origins) starts.push_back(corner_code(distribution_for(origin).sample(rng), m));

    plan.paths.reserve(r);
    for (std::size_t i = 0; i < r; ++i) {
        std::vector<int> perm(m);
        std::iota(perm.begin(), perm.end(), 0);
        shuffle(perm, rng);
        plan.paths.push_back(build_path(cfg, origins[i], starts[i], perm));
    }
    return plan;
}

} // namespace sift
