// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "sift/copula.hpp"
#include "sift/corner.hpp"
#include "sift/grid.hpp"
#include "sift/rng.hpp"

#include "oracles.hpp"

namespace sift {
namespace {

Matrix figure_correlations() {
    // rho(1,2) = rho(1,3) = -0.7, rho(2,3) = 0.7
    Matrix m = Matrix::identity(3);
    m(0, 1) = m(1, 0) = -0.7;
    m(0, 2) = m(2, 0) = -0.7;
    m(1, 2) = m(2, 1) = 0.7;
    return m;
}

CorrelationSpec pair_spec(std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& pairs) {
    CorrelationSpec spec;
    spec.rho = Matrix::identity(n);
    for (const auto& [a, b, rho] : pairs) {
        spec.rho(a, b) = rho;
        spec.rho(b, a) = rho;
    }
    return spec;
}

TEST(SpearmanConversion, FixedPoints) {
    EXPECT_DOUBLE_EQ(spearman_to_pearson(0.0), 0.0);
    EXPECT_DOUBLE_EQ(spearman_to_pearson(1.0), 1.0);
    EXPECT_DOUBLE_EQ(spearman_to_pearson(-1.0), -1.0);
    EXPECT_NEAR(spearman_to_pearson(0.7), 2.0 * std::sin(std::numbers::pi * 0.7 / 6.0), 1e-15);
}

TEST(BuildDependenceModel, SevenPairsBecomeSevenIndependentGroups) {
    // the 14-parameter / 7-pair layout: (i, i+7) pairs, alternating signs
    std::vector<std::tuple<std::size_t, std::size_t, double>> pairs;
    for (std::size_t i = 0; i < 7; ++i) pairs.push_back({i, i + 7, i < 3 ? -1.0 : 1.0});
    const auto model = build_dependence_model(pair_spec(14, pairs));
    EXPECT_EQ(model.dim(), 7u);
    EXPECT_EQ(model.n_params(), 14u);
    for (std::size_t g = 0; g < 7; ++g) {
        ASSERT_EQ(model.groups()[g].members.size(), 2u);
        EXPECT_EQ(model.groups()[g].members[0], g);
        EXPECT_EQ(model.groups()[g].members[1], g + 7);
        EXPECT_EQ(model.groups()[g].signs[0], +1);
        EXPECT_EQ(model.groups()[g].signs[1], g < 3 ? -1 : +1);
    }
    EXPECT_EQ(model.residual().describe().at("kind"), "independence");
}

TEST(BuildDependenceModel, IdentityMatrixGivesSingletons) {
    CorrelationSpec spec;
    spec.rho = Matrix::identity(5);
    const auto model = build_dependence_model(spec);
    EXPECT_EQ(model.dim(), 5u);
    for (std::size_t g = 0; g < 5; ++g) {
        EXPECT_EQ(model.groups()[g].members, (std::vector<std::size_t>{g}));
        EXPECT_EQ(model.sign_of(g), +1);
    }
    EXPECT_EQ(model.residual().describe().at("kind"), "independence");
}

TEST(BuildDependenceModel, SignContradictionRejected) {
    auto spec = pair_spec(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, -1.0}});
    EXPECT_THROW(build_dependence_model(spec), ConfigError);
}

TEST(BuildDependenceModel, TransitiveClosureMergesChains) {
    const auto model = build_dependence_model(pair_spec(4, {{0, 1, 1.0}, {1, 2, -1.0}}));
    EXPECT_EQ(model.dim(), 2u);
    EXPECT_EQ(model.groups()[0].members, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(model.groups()[0].signs, (std::vector<int>{+1, +1, -1}));
}

TEST(BuildDependenceModel, ResidualMustBePSD) {
    auto spec = pair_spec(3, {{0, 1, 0.9}, {0, 2, 0.9}, {1, 2, -0.9}});
    spec.scale = CorrelationScale::pearson;
    EXPECT_THROW(build_dependence_model(spec), ConfigError);
}

TEST(BuildDependenceModel, MemberEntriesMustAgreeWithGroupStructure) {
    // (0,1) comonotone; 0-2 correlated 0.5 but 1-2 left at zero: contradiction
    auto spec = pair_spec(3, {{0, 1, 1.0}, {0, 2, 0.5}});
    EXPECT_THROW(build_dependence_model(spec), ConfigError);

    // consistent version: rho(1,2) = rho(0,2) since sign(1) = +1
    auto ok = pair_spec(3, {{0, 1, 1.0}, {0, 2, 0.5}, {1, 2, 0.5}});
    EXPECT_NO_THROW(build_dependence_model(ok));
}

TEST(CorrelationSpec, ValidationNamesProblems) {
    CorrelationSpec spec;
    spec.rho = Matrix::identity(2);
    spec.rho(0, 1) = 0.5; // asymmetric
    EXPECT_THROW(spec.validate(), ConfigError);
    spec.rho(1, 0) = 0.5;
    EXPECT_NO_THROW(spec.validate());
    spec.rho(0, 0) = 0.9;
    EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(IndependenceCopula, CdfIsProduct) {
    IndependenceCopula c(3);
    const std::vector<double> u{0.5, 0.5, 0.5};
    EXPECT_DOUBLE_EQ(c.cdf(u), 0.125);
    const std::vector<double> zero{0.3, 0.0, 0.9};
    EXPECT_DOUBLE_EQ(c.cdf(zero), 0.0);
    const std::vector<double> ones{1.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(c.cdf(ones), 1.0);
}

TEST(GaussianCopula, CdfMatchesOrthantClosedForm) {
    GaussianCopula c(figure_correlations());
    const std::vector<double> u{0.5, 0.5, 0.5};
    const double expected = oracle::trivariate_orthant(-0.7, -0.7, 0.7);
    EXPECT_NEAR(expected, 0.0633, 2e-4); // the published value
    EXPECT_NEAR(c.cdf(u, 1e-4), expected, 2e-3);
}

TEST(GaussianCopula, CdfZeroAndOneComponents) {
    GaussianCopula c(figure_correlations());
    EXPECT_DOUBLE_EQ(c.cdf(std::vector<double>{0.0, 0.5, 0.5}), 0.0);
    // u_j = 1 marginalizes: C(1, .5, .5) = P(Z2<0, Z3<0)
    EXPECT_NEAR(c.cdf(std::vector<double>{1.0, 0.5, 0.5}, 1e-4), oracle::bivariate_orthant(0.7), 1e-3);
    EXPECT_DOUBLE_EQ(c.cdf(std::vector<double>{1.0, 1.0, 1.0}), 1.0);
}

TEST(GaussianCopula, CdfIsComponentwiseNondecreasing) {
    GaussianCopula c(figure_correlations());
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u(3), v(3);
        for (std::size_t j = 0; j < 3; ++j) {
            u[j] = rng.next_double();
            v[j] = u[j] + (1.0 - u[j]) * rng.next_double();
        }
        EXPECT_LE(c.cdf(u, 1e-4), c.cdf(v, 1e-4) + 5e-4);
    }
}

TEST(GaussianCopula, SamplesHaveUniformMarginals) {
    GaussianCopula c(figure_correlations());
    Rng rng(123);
    const std::size_t n = 10000;
    std::vector<std::vector<double>> dims(3, std::vector<double>(n));
    std::vector<double> u(3);
    for (std::size_t i = 0; i < n; ++i) {
        c.sample(rng, u);
        for (std::size_t j = 0; j < 3; ++j) dims[j][i] = u[j];
    }
    for (std::size_t j = 0; j < 3; ++j)
        EXPECT_LT(oracle::ks_statistic_uniform(dims[j]), oracle::ks_crit_99(n)) << "dimension " << j;
}

TEST(GaussianCopula, SampledSpearmanMatchesTarget) {
    // rank correlation 0.7 requested on the spearman scale
    CorrelationSpec spec = pair_spec(2, {{0, 1, 0.7}});
    const auto model = build_dependence_model(spec);
    Rng rng(2024);
    const std::size_t n = 100000;
    std::vector<double> a(n), b(n);
    std::vector<double> u(2);
    for (std::size_t i = 0; i < n; ++i) {
        model.residual().sample(rng, u);
        a[i] = u[0];
        b[i] = u[1];
    }
    EXPECT_NEAR(oracle::spearman(a, b), 0.7, 0.02);
}

TEST(IndependenceCopula, SamplesHaveUniformMarginals) {
    IndependenceCopula c(2);
    Rng rng(321);
    const std::size_t n = 10000;
    std::vector<std::vector<double>> dims(2, std::vector<double>(n));
    std::vector<double> u(2);
    for (std::size_t i = 0; i < n; ++i) {
        c.sample(rng, u);
        dims[0][i] = u[0];
        dims[1][i] = u[1];
    }
    for (auto& d : dims) EXPECT_LT(oracle::ks_statistic_uniform(d), oracle::ks_crit_99(n));
}

TEST(IndependenceCopula, SampledRankCorrelationIsZero) {
    IndependenceCopula c(2);
    Rng rng(99);
    const std::size_t n = 100000;
    std::vector<double> a(n), b(n);
    std::vector<double> u(2);
    for (std::size_t i = 0; i < n; ++i) {
        c.sample(rng, u);
        a[i] = u[0];
        b[i] = u[1];
    }
    EXPECT_NEAR(oracle::spearman(a, b), 0.0, 0.02);
}

TEST(GaussianCopula, EmpiricalCopulaConvergesToCdf) {
    GaussianCopula c(figure_correlations());
    Rng rng(5151);
    const std::size_t n = 100000;
    std::vector<std::vector<double>> samples(n, std::vector<double>(3));
    for (auto& s : samples) c.sample(rng, s);

    double worst = 0.0;
    for (double g1 = 0.125; g1 < 1.0; g1 += 0.125)
        for (double g2 = 0.125; g2 < 1.0; g2 += 0.125)
            for (double g3 = 0.125; g3 < 1.0; g3 += 0.125) {
                std::size_t count = 0;
                for (const auto& s : samples)
                    if (s[0] <= g1 && s[1] <= g2 && s[2] <= g3) ++count;
                const double empirical = static_cast<double>(count) / static_cast<double>(n);
                const std::vector<double> u{g1, g2, g3};
                worst = std::max(worst, std::fabs(empirical - c.cdf(u, 2e-4)));
            }
    EXPECT_LE(worst, 0.02);
}

TEST(MvnRectangle, UnreachableToleranceRaisesAccuracyError) {
    auto chol = cholesky_psd(figure_correlations());
    ASSERT_TRUE(chol.has_value());
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> lo{-inf, -inf, -inf}, hi{0.0, 0.0, 0.0};
    QmcOptions opts;
    opts.abs_tol = 1e-14;
    opts.first_batch = 64;
    opts.max_points = 256;
    EXPECT_THROW(mvn_rectangle(lo, hi, *chol, opts), AccuracyError);
}

// ---------------------------------------------------------------------------
// Corner distributions
// ---------------------------------------------------------------------------

DependenceModel figure_model() {
    CorrelationSpec spec;
    spec.rho = figure_correlations();
    spec.scale = CorrelationScale::pearson; // the published values are copula parameters
    return build_dependence_model(spec);
}

Hyperrectangle unit_cube(std::size_t m) {
    return {std::vector<double>(m, 0.0), std::vector<double>(m, 1.0)};
}

TEST(CornerDistribution, PublishedTrivariateValues) {
    const auto model = figure_model();
    const auto dist = corner_distribution(model, unit_cube(3));
    ASSERT_EQ(dist.prob.size(), 8u);
    EXPECT_NEAR(dist.prob[corner_index(CornerCode{{0, 0, 0}})], 0.0633, 2e-3);
    EXPECT_NEAR(dist.prob[corner_index(CornerCode{{1, 0, 0}})], 0.3101, 2e-3);
    EXPECT_NEAR(dist.prob[corner_index(CornerCode{{0, 1, 1}})], 0.3101, 2e-3);
}

TEST(CornerDistribution, SixSymmetricCornersAgree) {
    const auto model = figure_model();
    const auto dist = corner_distribution(model, unit_cube(3));
    const std::vector<std::vector<std::uint8_t>> low_corners = {
        {0, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1}, {1, 1, 1}};
    for (std::size_t i = 0; i < low_corners.size(); ++i)
        for (std::size_t j = i + 1; j < low_corners.size(); ++j)
            EXPECT_NEAR(dist.prob[corner_index(CornerCode{low_corners[i]})],
                        dist.prob[corner_index(CornerCode{low_corners[j]})], 4e-3);
}

TEST(CornerDistribution, MatchesOrthantOracleCornerwise) {
    const auto model = figure_model();
    const auto dist = corner_distribution(model, unit_cube(3));
    for (int b1 = 0; b1 < 2; ++b1)
        for (int b2 = 0; b2 < 2; ++b2)
            for (int b3 = 0; b3 < 2; ++b3) {
                const auto code = CornerCode{{static_cast<std::uint8_t>(b1), static_cast<std::uint8_t>(b2),
                                              static_cast<std::uint8_t>(b3)}};
                EXPECT_NEAR(dist.prob[corner_index(code)],
                            oracle::corner_orthant3(b1, b2, b3, -0.7, -0.7, 0.7), 2e-3);
            }
}

TEST(CornerDistribution, SumsToOne) {
    const auto model = figure_model();
    const auto dist = corner_distribution(model, unit_cube(3));
    double total = 0.0;
    for (double p : dist.prob) {
        EXPECT_GE(p, 0.0);
        total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(CornerDistribution, IndependenceIsUniform) {
    const auto model = DependenceModel::independent(3);
    Hyperrectangle cell{{0.1, 0.4, 0.7}, {0.3, 0.6, 0.9}};
    const auto dist = corner_distribution(model, cell);
    for (double p : dist.prob) EXPECT_NEAR(p, 1.0 / 8.0, 1e-12);
}

TEST(CornerDistribution, ComonotonePairForbidsDiscordantMemberCorners) {
    // a +1-signed pair is one effective factor; pushing its corner
    // distribution to member level leaves discordant combinations empty
    const auto model = build_dependence_model(pair_spec(2, {{0, 1, 1.0}}));
    ASSERT_EQ(model.dim(), 1u);
    const auto dist = corner_distribution(model, unit_cube(1));
    ASSERT_EQ(dist.prob.size(), 2u);
    EXPECT_NEAR(dist.prob[0], 0.5, 1e-12);
    EXPECT_NEAR(dist.prob[1], 0.5, 1e-12);

    std::vector<double> member_prob(4, 0.0); // corners of the (member0, member1) square
    for (std::size_t c = 0; c < dist.prob.size(); ++c) {
        std::size_t member_corner = 0;
        for (std::size_t k = 0; k < model.groups()[0].members.size(); ++k) {
            const bool bit = ((c >> 0) & 1u) == 1u;
            const bool member_bit = model.groups()[0].signs[k] > 0 ? bit : !bit;
            if (member_bit) member_corner |= (std::size_t{1} << model.groups()[0].members[k]);
        }
        member_prob[member_corner] += dist.prob[c];
    }
    EXPECT_DOUBLE_EQ(member_prob[0b01], 0.0);
    EXPECT_DOUBLE_EQ(member_prob[0b10], 0.0);
    EXPECT_NEAR(member_prob[0b00] + member_prob[0b11], 1.0, 1e-12);
}

TEST(CornerDistribution, DegenerateCellRejected) {
    const auto model = DependenceModel::independent(2);
    Hyperrectangle cell{{0.2, 0.5}, {0.2, 0.9}};
    EXPECT_THROW(corner_distribution(model, cell), ConfigError);
}

TEST(CornerDistribution, InclusionExclusionAgreesWithDirectBoxMass) {
    // two routes to the same corner mass: signed CDF sums vs one rectangle integral
    GaussianCopula copula(figure_correlations());
    const auto model = figure_model();
    Hyperrectangle cell{{0.0, 1.0 / 3.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0, 2.0 / 3.0}};
    const auto dist = corner_distribution(model, cell);

    const double cell_mass = copula.box_mass(cell.lower, cell.upper, 1e-5);
    for (std::size_t c = 0; c < dist.prob.size(); ++c) {
        std::vector<double> lo(3), hi(3);
        for (std::size_t j = 0; j < 3; ++j) {
            const double mid = 0.5 * (cell.lower[j] + cell.upper[j]);
            lo[j] = (c >> j) & 1u ? mid : cell.lower[j];
            hi[j] = (c >> j) & 1u ? cell.upper[j] : mid;
        }
        const double direct = copula.box_mass(lo, hi, 1e-5) / cell_mass;
        EXPECT_NEAR(dist.prob[c], direct, 3e-3) << "corner " << c;
    }
}

TEST(CornerDistribution, MonteCarloModeAgreesWithExact) {
    const auto model = figure_model();
    CornerOptions exact_opts;
    const auto exact = corner_distribution(model, unit_cube(3), exact_opts);

    CornerOptions mc_opts;
    mc_opts.exact_dim_limit = 0; // force Monte-Carlo
    const auto mc = corner_distribution(model, unit_cube(3), mc_opts);
    EXPECT_EQ(mc.mode, CornerDistribution::Mode::monte_carlo);
    EXPECT_GT(mc.mc_samples, 0u);
    for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(mc.prob[c], exact.prob[c], mc.mc_tol + 2e-3);
}

} // namespace
} // namespace sift
