// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sift/errors.hpp"
#include "sift/sampler.hpp"

namespace sift {

/// One elementary effect: the finite-difference quotient of the output per
/// unit step of effective factor `factor` on path `path`.
struct EffectSample {
    std::size_t factor = 0;
    std::size_t path = 0;
    double d = 0.0;
};

/// A path dropped from the analysis, with the reason (non-finite output).
struct PathExclusion {
    std::size_t path = 0;
    std::string reason;
};

struct EffectSet {
    std::size_t n_factors = 0;
    std::vector<EffectSample> samples;
    std::vector<PathExclusion> exclusions;
};

/// Compute one elementary effect per (path, factor) from the outputs at the
/// plan's evaluation points, in path-major order. The divisor keeps the sign
/// of the step, so walking an axis downward measures the same derivative:
/// d = (M_after - M_before) / (signed delta). Paths with any non-finite
/// output are excluded whole and reported.
inline EffectSet elementary_effects(const SamplingPlan& plan, std::span<const double> outputs) {
    const auto m = static_cast<std::size_t>(plan.cfg.n_factors);
    if (outputs.size() != plan.n_evaluation_points())
        throw ConfigError("elementary_effects: expected " + std::to_string(plan.n_evaluation_points()) +
                          " outputs, got " + std::to_string(outputs.size()));

    EffectSet set;
    set.n_factors = m;
    const double denom = plan.cfg.p - 1;
    for (std::size_t i = 0; i < plan.paths.size(); ++i) {
        const auto& path = plan.paths[i];
        const std::size_t base = i * (m + 1);

        bool finite = true;
        for (std::size_t k = 0; k <= m; ++k)
            if (!std::isfinite(outputs[base + k])) {
                set.exclusions.push_back({i, "non-finite model output at point " + std::to_string(k)});
                finite = false;
                break;
            }
        if (!finite) continue;

        for (std::size_t k = 0; k < m; ++k) {
            const auto axis = static_cast<std::size_t>(path.perm[k]);
            const int dlevel = path.points[k + 1].levels[axis] - path.points[k].levels[axis];
            const double signed_delta = static_cast<double>(dlevel) / denom;
            set.samples.push_back({axis, i, (outputs[base + k + 1] - outputs[base + k]) / signed_delta});
        }
    }
    return set;
}

/// Per-factor sensitivity measures.
struct FactorMeasures {
    std::string name;
    std::size_t index = 0;
    std::size_t n_effects = 0;
    double mu = 0.0;
    double mu_star = 0.0;
    std::optional<double> sigma; // absent when fewer than two effects
    double combined = 0.0;       // sqrt(mu^2 + sigma^2), derived column only

    nlohmann::json to_json() const {
        nlohmann::json j{{"factor", name}, {"mu", mu}, {"mu_star", mu_star}, {"effects", n_effects},
                         {"combined", combined}};
        j["sigma"] = sigma ? nlohmann::json(*sigma) : nlohmann::json(nullptr);
        return j;
    }
};

/// mu, mu*, sigma per factor plus the induced ranking (descending mu*, ties
/// by descending sigma, then input order).
struct SensitivityReport {
    std::vector<FactorMeasures> rows;     // input factor order
    std::vector<std::size_t> ranking;     // permutation of factor indices
    std::vector<PathExclusion> exclusions;

    std::size_t rank_of(std::size_t factor) const {
        for (std::size_t r = 0; r < ranking.size(); ++r)
            if (ranking[r] == factor) return r + 1;
        return 0;
    }
};

/// Sample mean, mean absolute value and (r-1)-denominator standard deviation
/// of the elementary effects of each factor.
inline SensitivityReport measures(const EffectSet& effects, const std::vector<std::string>& factor_names) {
    if (factor_names.size() != effects.n_factors)
        throw ConfigError("measures: factor name count does not match the effect set");
    if (effects.samples.empty()) throw EvaluationError("measures: empty effect set (no usable paths)");

    SensitivityReport report;
    report.exclusions = effects.exclusions;
    report.rows.resize(effects.n_factors);

    std::vector<std::vector<double>> per_factor(effects.n_factors);
    for (const auto& s : effects.samples) per_factor[s.factor].push_back(s.d);

    for (std::size_t f = 0; f < effects.n_factors; ++f) {
        auto& row = report.rows[f];
        row.name = factor_names[f];
        row.index = f;
        const auto& d = per_factor[f];
        row.n_effects = d.size();
        if (d.empty()) continue;
        double sum = 0.0, sum_abs = 0.0;
        for (double v : d) {
            sum += v;
            sum_abs += std::fabs(v);
        }
        const auto r = static_cast<double>(d.size());
        row.mu = sum / r;
        row.mu_star = sum_abs / r;
        if (d.size() >= 2) {
            double ss = 0.0;
            for (double v : d) ss += (v - row.mu) * (v - row.mu);
            row.sigma = std::sqrt(ss / (r - 1.0));
        }
        row.combined = std::sqrt(row.mu * row.mu + (row.sigma ? *row.sigma * *row.sigma : 0.0));
    }

    report.ranking.resize(effects.n_factors);
    std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
    std::stable_sort(report.ranking.begin(), report.ranking.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = report.rows[a];
        const auto& rb = report.rows[b];
        if (ra.mu_star != rb.mu_star) return ra.mu_star > rb.mu_star;
        const double sa = ra.sigma.value_or(0.0);
        const double sb = rb.sigma.value_or(0.0);
        if (sa != sb) return sa > sb;
        return false; // stable sort keeps input order
    });
    return report;
}

} // namespace sift
