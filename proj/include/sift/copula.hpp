// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sift/errors.hpp"
#include "sift/linalg.hpp"
#include "sift/mvn.hpp"
#include "sift/normal.hpp"
#include "sift/rng.hpp"

namespace sift {

/// How the entries of a correlation matrix are to be read.
enum class CorrelationScale { spearman, pearson };

inline std::string to_string(CorrelationScale s) {
    return s == CorrelationScale::spearman ? "spearman" : "pearson";
}

/// User-facing correlation input: a symmetric matrix of pairwise rank (or
/// Pearson) correlations with unit diagonal. |rho| = 1 entries declare
/// comonotone pairs and are factored out structurally before any Gaussian
/// machinery sees the matrix.
struct CorrelationSpec {
    Matrix rho;
    CorrelationScale scale = CorrelationScale::spearman;

    void validate() const {
        const std::size_t n = rho.dim();
        for (std::size_t i = 0; i < n; ++i) {
            if (std::fabs(rho(i, i) - 1.0) > 1e-12)
                throw ConfigError("correlations: diagonal entry [" + std::to_string(i) + "] must be 1");
            for (std::size_t j = 0; j < i; ++j) {
                if (std::fabs(rho(i, j) - rho(j, i)) > 1e-12)
                    throw ConfigError("correlations: matrix not symmetric at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
                if (rho(i, j) < -1.0 || rho(i, j) > 1.0)
                    throw ConfigError("correlations: entry (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") outside [-1, 1]");
            }
        }
    }
};

/// Spearman rank correlation of a bivariate Gaussian -> Pearson correlation
/// of the underlying normal.
inline double spearman_to_pearson(double rho_s) {
    return 2.0 * std::sin(std::numbers::pi * rho_s / 6.0);
}

// ---------------------------------------------------------------------------
// Copulas over the effective factors
// ---------------------------------------------------------------------------

/// Joint distribution on the unit hypercube with uniform marginals. The
/// abstraction is deliberately minimal so further families (Archimedean,
/// empirical) can slot in without interface changes.
class Copula {
public:
    virtual ~Copula() = default;

    virtual std::size_t dim() const = 0;

    /// C(u) to the given absolute tolerance. Exact families ignore the tolerance.
    virtual double cdf(std::span<const double> u, double abs_tol) const = 0;

    double cdf(std::span<const double> u) const { return cdf(u, default_cdf_tol()); }

    virtual double default_cdf_tol() const { return 5e-4; }

    /// One sample with uniform marginals, driven entirely by `rng`.
    virtual void sample(Rng& rng, std::span<double> out) const = 0;

    virtual nlohmann::json describe() const = 0;
};

class IndependenceCopula final : public Copula {
public:
    explicit IndependenceCopula(std::size_t dim) : dim_(dim) {}

    using Copula::cdf;

    std::size_t dim() const override { return dim_; }

    double cdf(std::span<const double> u, double) const override {
        double p = 1.0;
        for (double v : u) {
            if (v <= 0.0) return 0.0;
            p *= std::min(v, 1.0);
        }
        return p;
    }

    void sample(Rng& rng, std::span<double> out) const override {
        for (auto& v : out) v = rng.next_open();
    }

    nlohmann::json describe() const override { return {{"kind", "independence"}, {"dim", dim_}}; }

private:
    std::size_t dim_;
};

class GaussianCopula final : public Copula {
public:
    GaussianCopula(Matrix pearson, QmcOptions qmc = {}) : pearson_(std::move(pearson)), qmc_(qmc) {
        auto chol = cholesky_psd(pearson_);
        if (!chol)
            throw ConfigError("gaussian copula: correlation matrix is not positive semi-definite");
        chol_ = std::move(*chol);
    }

    using Copula::cdf;

    std::size_t dim() const override { return pearson_.dim(); }

    const Matrix& pearson() const { return pearson_; }

    double default_cdf_tol() const override { return qmc_.abs_tol; }

    double cdf(std::span<const double> u, double abs_tol) const override {
        const std::size_t m = dim();
        // u_j = 0 kills the mass; u_j >= 1 marginalizes the axis away.
        std::vector<std::size_t> active;
        for (std::size_t j = 0; j < m; ++j) {
            if (u[j] <= 0.0) return 0.0;
            if (u[j] < 1.0) active.push_back(j);
        }
        if (active.empty()) return 1.0;
        if (active.size() == 1) return u[active[0]];

        std::vector<double> lower(active.size(), -std::numeric_limits<double>::infinity());
        std::vector<double> upper(active.size());
        for (std::size_t i = 0; i < active.size(); ++i) upper[i] = norm_quantile(u[active[i]]);

        QmcOptions o = qmc_;
        o.abs_tol = abs_tol;
        if (active.size() == m) return mvn_rectangle(lower, upper, chol_, o);
        auto sub = cholesky_psd(pearson_.submatrix(active));
        if (!sub) throw ConfigError("gaussian copula: submatrix not positive semi-definite");
        return mvn_rectangle(lower, upper, *sub, o);
    }

    /// Probability mass of the box [lo, hi] in copula coordinates; an
    /// independent route to the same quantity as inclusion-exclusion over cdf.
    double box_mass(std::span<const double> lo, std::span<const double> hi, double abs_tol) const {
        std::vector<double> lower(dim()), upper(dim());
        for (std::size_t j = 0; j < dim(); ++j) {
            lower[j] = norm_quantile(std::clamp(lo[j], 0.0, 1.0));
            upper[j] = norm_quantile(std::clamp(hi[j], 0.0, 1.0));
        }
        QmcOptions o = qmc_;
        o.abs_tol = abs_tol;
        return mvn_rectangle(lower, upper, chol_, o);
    }

    void sample(Rng& rng, std::span<double> out) const override {
        const std::size_t m = dim();
        std::vector<double> z(m);
        for (auto& v : z) v = norm_quantile(rng.next_open());
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= i; ++j) acc += chol_(i, j) * z[j];
            out[i] = norm_cdf(acc);
        }
    }

    nlohmann::json describe() const override {
        nlohmann::json mat = nlohmann::json::array();
        for (std::size_t i = 0; i < dim(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t j = 0; j < dim(); ++j) row.push_back(pearson_(i, j));
            mat.push_back(row);
        }
        return {{"kind", "gaussian"}, {"dim", dim()}, {"pearson", mat}};
    }

private:
    Matrix pearson_;
    Matrix chol_;
    QmcOptions qmc_;
};

// ---------------------------------------------------------------------------
// Dependence model: comonotone groups + residual copula
// ---------------------------------------------------------------------------

/// A set of parameters that are completely rank-correlated and move as one
/// effective factor. The first-listed member carries sign +1 by convention;
/// sign -1 members move in the opposite direction.
struct ComonotoneGroup {
    std::vector<std::size_t> members;
    std::vector<int> signs;
};

/// Dependence structure over n parameters: a partition into comonotone
/// groups plus a copula over the group representatives. Immutable after
/// construction and safe to share across threads.
class DependenceModel {
public:
    DependenceModel(std::vector<ComonotoneGroup> groups, std::shared_ptr<const Copula> residual)
        : groups_(std::move(groups)), residual_(std::move(residual)) {
        n_params_ = 0;
        for (const auto& g : groups_) n_params_ += g.members.size();
        group_of_.assign(n_params_, 0);
        sign_of_.assign(n_params_, +1);
        for (std::size_t g = 0; g < groups_.size(); ++g)
            for (std::size_t k = 0; k < groups_[g].members.size(); ++k) {
                group_of_[groups_[g].members[k]] = g;
                sign_of_[groups_[g].members[k]] = groups_[g].signs[k];
            }
    }

    /// Independent parameters: n singleton groups.
    static DependenceModel independent(std::size_t n) {
        std::vector<ComonotoneGroup> groups(n);
        for (std::size_t i = 0; i < n; ++i) groups[i] = {{i}, {+1}};
        return DependenceModel(std::move(groups), std::make_shared<IndependenceCopula>(n));
    }

    std::size_t dim() const { return groups_.size(); }       // effective factors
    std::size_t n_params() const { return n_params_; }       // underlying parameters
    const std::vector<ComonotoneGroup>& groups() const { return groups_; }
    std::size_t group_of(std::size_t param) const { return group_of_[param]; }
    int sign_of(std::size_t param) const { return sign_of_[param]; }
    const Copula& residual() const { return *residual_; }

    double cdf(std::span<const double> u) const { return residual_->cdf(u); }
    double cdf(std::span<const double> u, double abs_tol) const { return residual_->cdf(u, abs_tol); }

    std::vector<std::vector<double>> sample(std::size_t count, Rng& rng) const {
        std::vector<std::vector<double>> out(count, std::vector<double>(dim()));
        for (auto& row : out) residual_->sample(rng, row);
        return out;
    }

    nlohmann::json describe() const {
        nlohmann::json groups = nlohmann::json::array();
        for (const auto& g : groups_) {
            nlohmann::json members = nlohmann::json::array();
            for (std::size_t k = 0; k < g.members.size(); ++k)
                members.push_back({{"param", g.members[k]}, {"sign", g.signs[k]}});
            groups.push_back(members);
        }
        return {{"groups", groups}, {"residual", residual_->describe()}};
    }

private:
    std::vector<ComonotoneGroup> groups_;
    std::shared_ptr<const Copula> residual_;
    std::vector<std::size_t> group_of_;
    std::vector<int> sign_of_;
    std::size_t n_params_ = 0;
};

namespace detail {

/// Union-find with sign parity for the |rho| = 1 graph.
struct SignedUnionFind {
    std::vector<std::size_t> parent;
    std::vector<int> sign; // sign relative to the root

    explicit SignedUnionFind(std::size_t n) : parent(n), sign(n, +1) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    }

    std::pair<std::size_t, int> find(std::size_t x) {
        if (parent[x] == x) return {x, +1};
        auto [root, s] = find(parent[x]);
        parent[x] = root;
        sign[x] *= s;
        return {root, sign[x]};
    }

    /// Join x and y with relative sign rel; returns false on contradiction.
    bool unite(std::size_t x, std::size_t y, int rel) {
        auto [rx, sx] = find(x);
        auto [ry, sy] = find(y);
        if (rx == ry) return sx * sy == rel;
        parent[ry] = rx;
        sign[ry] = rel * sx * sy;
        return true;
    }
};

} // namespace detail

/// Factor |rho| = 1 entries into comonotone groups, convert the residual
/// correlations to Pearson scale, validate them, and wrap everything in a
/// DependenceModel. A perfectly correlated entry never reaches the Gaussian
/// correlation matrix (it would make it singular); the pair becomes a single
/// effective factor instead.
inline DependenceModel build_dependence_model(const CorrelationSpec& spec, QmcOptions qmc = {}) {
    spec.validate();
    const std::size_t n = spec.rho.dim();
    constexpr double kPerfect = 1.0 - 1e-9;

    detail::SignedUnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::fabs(spec.rho(i, j)) >= kPerfect) {
                const int rel = spec.rho(i, j) > 0 ? +1 : -1;
                if (!uf.unite(i, j, rel))
                    throw ConfigError("correlations: inconsistent perfect correlations involving parameters " +
                                      std::to_string(i) + " and " + std::to_string(j));
            }

    // Groups ordered by first-listed member; representative sign fixed to +1.
    std::vector<ComonotoneGroup> groups;
    std::vector<int> rep_sign; // representative's sign relative to its union-find root
    std::unordered_map<std::size_t, std::size_t> root_to_group;
    for (std::size_t i = 0; i < n; ++i) {
        auto [root, s] = uf.find(i);
        auto it = root_to_group.find(root);
        if (it == root_to_group.end()) {
            root_to_group.emplace(root, groups.size());
            groups.push_back({{i}, {+1}});
            rep_sign.push_back(s);
        } else {
            auto& g = groups[it->second];
            g.members.push_back(i);
            g.signs.push_back(s * rep_sign[it->second]);
        }
    }

    const std::size_t m = groups.size();

    // Residual correlations between group representatives, re-based so the
    // representative of each group carries sign +1.
    Matrix residual(m);
    for (std::size_t a = 0; a < m; ++a) residual(a, a) = 1.0;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const double r = spec.rho(groups[a].members[0], groups[b].members[0]);
            residual(a, b) = residual(b, a) = r;
        }
    }

    // Cross-group entries between non-representative members must agree with
    // the representative entry up to the member signs.
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            for (std::size_t ka = 0; ka < groups[a].members.size(); ++ka)
                for (std::size_t kb = 0; kb < groups[b].members.size(); ++kb) {
                    const double got = spec.rho(groups[a].members[ka], groups[b].members[kb]);
                    const double want = residual(a, b) * groups[a].signs[ka] * groups[b].signs[kb];
                    if (std::fabs(got - want) > 1e-9)
                        throw ConfigError(
                            "correlations: entry between parameters " + std::to_string(groups[a].members[ka]) +
                            " and " + std::to_string(groups[b].members[kb]) +
                            " contradicts the comonotone structure (expected " + std::to_string(want) + ")");
                }
        }

    if (spec.scale == CorrelationScale::spearman)
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                if (a != b) residual(a, b) = spearman_to_pearson(residual(a, b));

    std::shared_ptr<const Copula> copula;
    if (residual.is_identity(0.0)) {
        copula = std::make_shared<IndependenceCopula>(m);
    } else {
        if (!cholesky_psd(residual))
            throw ConfigError("correlations: residual matrix is not positive semi-definite");
        copula = std::make_shared<GaussianCopula>(residual, qmc);
    }
    return DependenceModel(std::move(groups), std::move(copula));
}

} // namespace sift
