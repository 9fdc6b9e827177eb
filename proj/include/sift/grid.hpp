// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "sift/errors.hpp"

namespace sift {

/// Discrete geometry of the screening design: a unit hypercube over
/// `n_factors` effective factors, discretized in `p` levels per axis, walked
/// in steps of `s` cells. Levels are kept as integers everywhere; unit-cube
/// coordinates are derived on demand so path identity checks stay exact.
struct GridConfig {
    int n_factors;
    int p;
    int s;

    GridConfig(int n_factors_, int p_, int s_) : n_factors(n_factors_), p(p_), s(s_) {
        if (n_factors < 1) throw ConfigError("grid: n_factors must be >= 1, got " + std::to_string(n_factors));
        if (p < 2) throw ConfigError("grid: levels p must be >= 2, got " + std::to_string(p));
        if (s < 1 || s > p - 1)
            throw ConfigError("grid: step s must be in [1, p-1], got s=" + std::to_string(s) +
                              " with p=" + std::to_string(p));
    }

    /// Number of distinct block origins per axis; also the LHSD round size.
    int origins_per_axis() const { return p - s; }
};

/// Morris step delta = s/(p-1), the normalized perturbation magnitude.
inline double morris_step(const GridConfig& cfg) {
    return static_cast<double>(cfg.s) / static_cast<double>(cfg.p - 1);
}

/// A point on the level grid; axis j sits at unit coordinate levels[j]/(p-1).
struct GridPoint {
    std::vector<int> levels;

    bool operator==(const GridPoint& o) const { return levels == o.levels; }

    double unit(std::size_t axis, const GridConfig& cfg) const {
        return static_cast<double>(levels[axis]) / static_cast<double>(cfg.p - 1);
    }
};

/// Lower corner of an s x s block; each component lies in [0, p-1-s].
struct BlockOrigin {
    std::vector<int> levels;

    bool operator==(const BlockOrigin& o) const { return levels == o.levels; }
};

/// Binary label of a block corner: corner level on axis j is origin[j] + bits[j]*s.
struct CornerCode {
    std::vector<std::uint8_t> bits;

    bool operator==(const CornerCode& o) const { return bits == o.bits; }

    CornerCode negated() const {
        CornerCode c = *this;
        for (auto& b : c.bits) b = static_cast<std::uint8_t>(1 - b);
        return c;
    }
};

/// The corners of a block, encoded as indices: bit j of the index is the
/// label on axis j.
inline std::size_t corner_index(const CornerCode& code) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < code.bits.size(); ++j)
        if (code.bits[j]) idx |= (std::size_t{1} << j);
    return idx;
}

inline CornerCode corner_code(std::size_t index, std::size_t n_factors) {
    CornerCode c;
    c.bits.resize(n_factors);
    for (std::size_t j = 0; j < n_factors; ++j) c.bits[j] = (index >> j) & 1u;
    return c;
}

/// Grid point of a block corner.
inline GridPoint corner_point(const GridConfig& cfg, const BlockOrigin& origin, const CornerCode& code) {
    GridPoint pt;
    pt.levels.resize(origin.levels.size());
    for (std::size_t j = 0; j < origin.levels.size(); ++j)
        pt.levels[j] = origin.levels[j] + static_cast<int>(code.bits[j]) * cfg.s;
    return pt;
}

/// One elementary path: n_factors+1 grid points walking the block contour
/// from a start corner to its opposite, changing one axis per step.
struct ElementaryPath {
    std::vector<GridPoint> points;
    BlockOrigin origin;
    CornerCode start;
    std::vector<int> perm; // 0-based axis visited at each step

    std::size_t n_steps() const { return perm.size(); }
};

/// Total number of distinct elementary paths: (p-s)^n * 2^n * n! / 2
/// (a path and its reverse decompose into the same elementary effects).
/// Throws on 64-bit overflow rather than wrapping.
inline std::uint64_t count_paths(const GridConfig& cfg) {
    auto checked_mul = [](std::uint64_t a, std::uint64_t b) {
        std::uint64_t out = 0;
        if (__builtin_mul_overflow(a, b, &out))
            throw std::overflow_error("count_paths: result exceeds 64 bits");
        return out;
    };
    // corners * orders / 2 = 2^(n-1) * n!
    std::uint64_t total = 1;
    for (int i = 1; i < cfg.n_factors; ++i) total = checked_mul(total, 2);
    for (int i = 2; i <= cfg.n_factors; ++i) total = checked_mul(total, static_cast<std::uint64_t>(i));
    const auto cells_per_axis = static_cast<std::uint64_t>(cfg.p - cfg.s);
    for (int i = 0; i < cfg.n_factors; ++i) total = checked_mul(total, cells_per_axis);
    return total;
}

/// Assemble the path that starts at `start` and negates the bits in the
/// order given by `perm` (a Gray-code walk ending at the opposite corner).
inline ElementaryPath build_path(const GridConfig& cfg, const BlockOrigin& origin, const CornerCode& start,
                                 const std::vector<int>& perm) {
    const auto n = static_cast<std::size_t>(cfg.n_factors);
    if (origin.levels.size() != n || start.bits.size() != n || perm.size() != n)
        throw ConfigError("build_path: origin/start/perm dimensions must all equal n_factors");
    std::vector<bool> seen(n, false);
    for (int axis : perm) {
        if (axis < 0 || static_cast<std::size_t>(axis) >= n || seen[static_cast<std::size_t>(axis)])
            throw ConfigError("build_path: perm is not a permutation of the axes");
        seen[static_cast<std::size_t>(axis)] = true;
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (origin.levels[j] < 0 || origin.levels[j] > cfg.p - 1 - cfg.s)
            throw ConfigError("build_path: block origin outside the grid on axis " + std::to_string(j));
        if (start.bits[j] > 1) throw ConfigError("build_path: corner bits must be 0 or 1");
    }

    ElementaryPath path;
    path.origin = origin;
    path.start = start;
    path.perm = perm;
    path.points.reserve(n + 1);

    CornerCode code = start;
    path.points.push_back(corner_point(cfg, origin, code));
    for (int axis : perm) {
        code.bits[static_cast<std::size_t>(axis)] ^= 1u;
        path.points.push_back(corner_point(cfg, origin, code));
    }
    return path;
}

} // namespace sift
