// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "sift/grid.hpp"
#include "sift/rng.hpp"

#include "oracles.hpp"

namespace sift {
namespace {

TEST(GridConfig, ValidatesInvariants) {
    EXPECT_NO_THROW(GridConfig(3, 4, 2));
    EXPECT_THROW(GridConfig(0, 4, 1), ConfigError);
    EXPECT_THROW(GridConfig(2, 1, 1), ConfigError);
    EXPECT_THROW(GridConfig(2, 4, 0), ConfigError);
    EXPECT_THROW(GridConfig(2, 4, 4), ConfigError); // s must be <= p-1
}

TEST(MorrisStep, DirectSubstitution) {
    EXPECT_DOUBLE_EQ(morris_step(GridConfig(1, 4, 2)), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(morris_step(GridConfig(1, 2, 1)), 1.0);
    EXPECT_DOUBLE_EQ(morris_step(GridConfig(1, 4, 1)), 1.0 / 3.0);
    EXPECT_GT(morris_step(GridConfig(1, 7, 1)), 0.0);
    EXPECT_LE(morris_step(GridConfig(1, 7, 6)), 1.0);
}

TEST(CountPaths, KnownValues) {
    EXPECT_EQ(count_paths(GridConfig(2, 4, 1)), 36u);
    EXPECT_EQ(count_paths(GridConfig(3, 3, 1)), 192u);
    EXPECT_EQ(count_paths(GridConfig(1, 2, 1)), 1u);
}

TEST(CountPaths, MatchesExhaustiveEnumeration) {
    for (int n = 1; n <= 3; ++n)
        for (int p = 2; p <= 4; ++p)
            for (int s = 1; s < p; ++s)
                EXPECT_EQ(count_paths(GridConfig(n, p, s)), oracle::count_distinct_paths(n, p, s))
                    << "n=" << n << " p=" << p << " s=" << s;
}

TEST(CountPaths, OverflowDetected) {
    EXPECT_THROW(count_paths(GridConfig(25, 4, 1)), std::overflow_error);
}

TEST(BuildPath, GrayCodeWalkFromPaper) {
    // start (1,0,0), traversal order z,x,y -> corner codes
    // (1,0,0), (1,0,1), (0,0,1), (0,1,1)
    GridConfig cfg(3, 2, 1);
    BlockOrigin origin{{0, 0, 0}};
    CornerCode start{{1, 0, 0}};
    const auto path = build_path(cfg, origin, start, {2, 0, 1});
    ASSERT_EQ(path.points.size(), 4u);
    EXPECT_EQ(path.points[0].levels, (std::vector<int>{1, 0, 0}));
    EXPECT_EQ(path.points[1].levels, (std::vector<int>{1, 0, 1}));
    EXPECT_EQ(path.points[2].levels, (std::vector<int>{0, 0, 1}));
    EXPECT_EQ(path.points[3].levels, (std::vector<int>{0, 1, 1}));
}

TEST(BuildPath, CanonicalAndReverseOrders) {
    GridConfig cfg(2, 2, 1);
    BlockOrigin origin{{0, 0}};
    auto p1 = build_path(cfg, origin, CornerCode{{0, 0}}, {0, 1});
    EXPECT_EQ(p1.points[0].levels, (std::vector<int>{0, 0}));
    EXPECT_EQ(p1.points[1].levels, (std::vector<int>{1, 0}));
    EXPECT_EQ(p1.points[2].levels, (std::vector<int>{1, 1}));

    auto p2 = build_path(cfg, origin, CornerCode{{1, 1}}, {1, 0});
    EXPECT_EQ(p2.points[0].levels, (std::vector<int>{1, 1}));
    EXPECT_EQ(p2.points[1].levels, (std::vector<int>{1, 0}));
    EXPECT_EQ(p2.points[2].levels, (std::vector<int>{0, 0}));
}

TEST(BuildPath, EndsAtNegatedCorner) {
    GridConfig cfg(4, 5, 2);
    BlockOrigin origin{{1, 0, 2, 1}};
    CornerCode start{{1, 0, 1, 0}};
    const auto path = build_path(cfg, origin, start, {3, 1, 0, 2});
    const auto expected_end = corner_point(cfg, origin, start.negated());
    EXPECT_EQ(path.points.back().levels, expected_end.levels);
}

TEST(BuildPath, RejectsBadInput) {
    GridConfig cfg(2, 4, 1);
    EXPECT_THROW(build_path(cfg, BlockOrigin{{0}}, CornerCode{{0, 0}}, {0, 1}), ConfigError);
    EXPECT_THROW(build_path(cfg, BlockOrigin{{0, 0}}, CornerCode{{0, 0}}, {0, 0}), ConfigError);
    EXPECT_THROW(build_path(cfg, BlockOrigin{{0, 3}}, CornerCode{{0, 0}}, {0, 1}), ConfigError);
}

TEST(BuildPath, PathInvariantsHoldForRandomInputs) {
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(4));
        const int p = 2 + static_cast<int>(rng.next_below(4));
        const int s = 1 + static_cast<int>(rng.next_below(static_cast<std::size_t>(p - 1)));
        GridConfig cfg(n, p, s);

        BlockOrigin origin;
        for (int j = 0; j < n; ++j)
            origin.levels.push_back(static_cast<int>(rng.next_below(static_cast<std::size_t>(p - s))));
        CornerCode start;
        for (int j = 0; j < n; ++j) start.bits.push_back(static_cast<std::uint8_t>(rng.next_below(2)));
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        shuffle(perm, rng);

        const auto path = build_path(cfg, origin, start, perm);
        ASSERT_EQ(path.points.size(), static_cast<std::size_t>(n) + 1);

        std::vector<int> changes(static_cast<std::size_t>(n), 0);
        for (std::size_t k = 0; k + 1 < path.points.size(); ++k) {
            int changed = 0;
            for (int j = 0; j < n; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                const int lo = path.points[k].levels[ju];
                const int hi = path.points[k + 1].levels[ju];
                ASSERT_GE(lo, 0);
                ASSERT_LE(lo, p - 1);
                if (lo != hi) {
                    ++changed;
                    ++changes[ju];
                    EXPECT_EQ(std::abs(hi - lo), s);
                }
            }
            EXPECT_EQ(changed, 1) << "exactly one axis changes per step";
        }
        for (int c : changes) EXPECT_EQ(c, 1) << "every axis changes exactly once";
        EXPECT_EQ(corner_index(path.start.negated()),
                  corner_index(path.start) ^ ((std::size_t{1} << n) - 1));
    }
}

TEST(CornerCode, IndexRoundTrip) {
    for (std::size_t idx = 0; idx < 16; ++idx) {
        const auto code = corner_code(idx, 4);
        EXPECT_EQ(corner_index(code), idx);
    }
}

} // namespace
} // namespace sift
