// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sift/copula.hpp"
#include "sift/effects.hpp"
#include "sift/errors.hpp"
#include "sift/evaluator.hpp"
#include "sift/grid.hpp"
#include "sift/sampler.hpp"
#include "sift/svg.hpp"

namespace sift {

/// Everything needed to plan, execute and analyze one screening campaign.
struct CampaignConfig {
    std::vector<ParameterSpec> parameters;
    CorrelationSpec correlations;      // n x n, identity when none given
    std::string copula_kind = "gaussian"; // "gaussian" or "independence"
    int levels = 4;
    int step = 2;
    std::size_t paths = 10;
    std::uint64_t seed = 0;
    nlohmann::json model;              // model spec, see make_model
    std::size_t workers = 1;
    CornerMode corner_mode = CornerMode::per_cell;

    void validate() const {
        if (parameters.empty()) throw ConfigError("parameters: at least one parameter is required");
        for (const auto& p : parameters) p.validate();
        for (std::size_t i = 0; i < parameters.size(); ++i)
            for (std::size_t j = i + 1; j < parameters.size(); ++j)
                if (parameters[i].name == parameters[j].name)
                    throw ConfigError("parameters: duplicate name '" + parameters[i].name + "'");
        if (correlations.rho.dim() != parameters.size())
            throw ConfigError("correlations: matrix dimension must equal the parameter count");
        correlations.validate();
        if (copula_kind != "gaussian" && copula_kind != "independence")
            throw ConfigError("copula: must be 'gaussian' or 'independence', got '" + copula_kind + "'");
        GridConfig probe(1, levels, step); // validates levels/step
        if (paths < 1) throw ConfigError("paths: must be >= 1");
        if (workers < 1) throw ConfigError("workers: must be >= 1");
        if (!model.is_object()) throw ConfigError("model: must be an object with an 'id'");
    }

    /// The dependence model this campaign screens under. The independence
    /// copula ignores all correlations (every parameter is its own factor),
    /// which is exactly the classic screening design.
    DependenceModel dependence() const {
        if (copula_kind == "independence") return DependenceModel::independent(parameters.size());
        return build_dependence_model(correlations);
    }
};

inline nlohmann::json config_to_json(const CampaignConfig& cfg) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : cfg.parameters)
        params.push_back({{"name", p.name}, {"min", p.min}, {"max", p.max}, {"baseline", p.baseline}});
    nlohmann::json matrix = nlohmann::json::array();
    for (std::size_t i = 0; i < cfg.correlations.rho.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < cfg.correlations.rho.dim(); ++j) row.push_back(cfg.correlations.rho(i, j));
        matrix.push_back(row);
    }
    return {{"parameters", params},
            {"correlations", {{"scale", to_string(cfg.correlations.scale)}, {"matrix", matrix}}},
            {"copula", cfg.copula_kind},
            {"levels", cfg.levels},
            {"step", cfg.step},
            {"paths", cfg.paths},
            {"seed", cfg.seed},
            {"model", cfg.model},
            {"workers", cfg.workers},
            {"corner_mode", to_string(cfg.corner_mode)}};
}

inline CampaignConfig config_from_json(const nlohmann::json& j) {
    CampaignConfig cfg;
    if (!j.contains("parameters") || !j.at("parameters").is_array())
        throw ConfigError("parameters: required array is missing");
    for (const auto& pj : j.at("parameters")) {
        ParameterSpec p;
        if (!pj.contains("name")) throw ConfigError("parameters[]: 'name' is required");
        p.name = pj.at("name").get<std::string>();
        if (!pj.contains("min") || !pj.contains("max"))
            throw ConfigError("parameter " + p.name + ": 'min' and 'max' are required");
        p.min = pj.at("min").get<double>();
        p.max = pj.at("max").get<double>();
        p.baseline = pj.value("baseline", 0.5 * (p.min + p.max));
        cfg.parameters.push_back(std::move(p));
    }

    const std::size_t n = cfg.parameters.size();
    cfg.correlations.rho = Matrix::identity(n);
    if (j.contains("correlations")) {
        const auto& cj = j.at("correlations");
        const std::string scale = cj.value("scale", "spearman");
        if (scale == "spearman") cfg.correlations.scale = CorrelationScale::spearman;
        else if (scale == "pearson") cfg.correlations.scale = CorrelationScale::pearson;
        else throw ConfigError("correlations.scale: must be 'spearman' or 'pearson', got '" + scale + "'");

        auto index_of = [&](const std::string& name) -> std::size_t {
            for (std::size_t i = 0; i < n; ++i)
                if (cfg.parameters[i].name == name) return i;
            throw ConfigError("correlations.pairs: unknown parameter '" + name + "'");
        };
        if (cj.contains("matrix")) {
            const auto& mj = cj.at("matrix");
            if (mj.size() != n) throw ConfigError("correlations.matrix: expected " + std::to_string(n) + " rows");
            for (std::size_t i = 0; i < n; ++i) {
                if (mj.at(i).size() != n)
                    throw ConfigError("correlations.matrix: row " + std::to_string(i) + " has wrong length");
                for (std::size_t k = 0; k < n; ++k) cfg.correlations.rho(i, k) = mj.at(i).at(k).get<double>();
            }
        } else if (cj.contains("pairs")) {
            for (const auto& pj : cj.at("pairs")) {
                const auto a = index_of(pj.at("a").get<std::string>());
                const auto b = index_of(pj.at("b").get<std::string>());
                const double rho = pj.at("rho").get<double>();
                if (a == b) throw ConfigError("correlations.pairs: a pair must name two distinct parameters");
                cfg.correlations.rho(a, b) = rho;
                cfg.correlations.rho(b, a) = rho;
            }
        }
    }

    cfg.copula_kind = j.value("copula", "gaussian");
    cfg.levels = j.value("levels", 4);
    cfg.step = j.value("step", 2);
    cfg.paths = j.value("paths", std::size_t{10});
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (!j.contains("model")) throw ConfigError("model: required object is missing");
    cfg.model = j.at("model");
    cfg.workers = j.value("workers", std::size_t{1});
    const std::string mode = j.value("corner_mode", "per_cell");
    if (mode == "per_cell") cfg.corner_mode = CornerMode::per_cell;
    else if (mode == "shared") cfg.corner_mode = CornerMode::shared;
    else throw ConfigError("corner_mode: must be 'per_cell' or 'shared', got '" + mode + "'");

    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Campaign plan
// ---------------------------------------------------------------------------

/// A planned campaign: the sampling design plus everything `run` and
/// `analyze` need, self-contained so planning and execution can happen on
/// different machines.
struct CampaignPlan {
    SamplingPlan sampling{GridConfig(1, 2, 1), 0, 0, CornerMode::per_cell, {}};
    std::vector<ParameterSpec> parameters;  // original order, group/sign filled
    std::vector<std::string> factor_names;  // group order
    nlohmann::json model_spec;
    nlohmann::json copula_info;
    std::size_t workers = 1;
};

inline std::string group_name(const ComonotoneGroup& group, const std::vector<ParameterSpec>& params) {
    std::string name;
    for (std::size_t k = 0; k < group.members.size(); ++k) {
        if (k) name += " -- ";
        name += params[group.members[k]].name;
    }
    return name;
}

inline CampaignPlan make_plan(const CampaignConfig& cfg) {
    cfg.validate();
    const DependenceModel model = cfg.dependence();

    CampaignPlan plan;
    plan.parameters = cfg.parameters;
    assign_groups(plan.parameters, model);
    for (const auto& g : model.groups()) plan.factor_names.push_back(group_name(g, plan.parameters));
    plan.model_spec = cfg.model;
    plan.copula_info = {{"kind", cfg.copula_kind},
                        {"scale", to_string(cfg.correlations.scale)},
                        {"structure", model.describe()}};
    plan.workers = cfg.workers;

    GridConfig grid(static_cast<int>(model.dim()), cfg.levels, cfg.step);
    PlanOptions opts;
    opts.corner_mode = cfg.corner_mode;
    plan.sampling = build_plan(model, grid, cfg.paths, cfg.seed, opts);
    return plan;
}

inline nlohmann::json plan_to_json(const CampaignPlan& plan) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : plan.parameters)
        params.push_back({{"name", p.name},
                          {"min", p.min},
                          {"max", p.max},
                          {"baseline", p.baseline},
                          {"group", p.group},
                          {"sign", p.sign}});
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& path : plan.sampling.paths) {
        nlohmann::json points = nlohmann::json::array();
        for (const auto& pt : path.points) points.push_back(pt.levels);
        paths.push_back({{"origin", path.origin.levels},
                         {"start", path.start.bits},
                         {"perm", path.perm},
                         {"points", points}});
    }
    return {{"format", "sift-plan/1"},
            {"levels", plan.sampling.cfg.p},
            {"step", plan.sampling.cfg.s},
            {"seed", plan.sampling.seed},
            {"corner_mode", to_string(plan.sampling.corner_mode)},
            {"copula", plan.copula_info},
            {"model", plan.model_spec},
            {"workers", plan.workers},
            {"factors", plan.factor_names},
            {"parameters", params},
            {"paths", paths}};
}

inline CampaignPlan plan_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "sift-plan/1") throw ConfigError("plan: missing or unknown 'format'");
    CampaignPlan plan;
    j.at("factors").get_to(plan.factor_names);
    if (plan.factor_names.empty()) throw ConfigError("plan.factors: must not be empty");

    for (const auto& pj : j.at("parameters")) {
        ParameterSpec p;
        p.name = pj.at("name").get<std::string>();
        p.min = pj.at("min").get<double>();
        p.max = pj.at("max").get<double>();
        p.baseline = pj.value("baseline", 0.5 * (p.min + p.max));
        p.group = pj.at("group").get<std::size_t>();
        p.sign = pj.at("sign").get<int>();
        p.validate();
        if (p.group >= plan.factor_names.size())
            throw ConfigError("plan.parameters: parameter " + p.name + " references unknown group");
        plan.parameters.push_back(std::move(p));
    }

    GridConfig cfg(static_cast<int>(plan.factor_names.size()), j.at("levels").get<int>(), j.at("step").get<int>());
    plan.sampling.cfg = cfg;
    plan.sampling.seed = j.value("seed", std::uint64_t{0});
    const std::string mode = j.value("corner_mode", "per_cell");
    plan.sampling.corner_mode = mode == "shared" ? CornerMode::shared : CornerMode::per_cell;

    for (const auto& pj : j.at("paths")) {
        BlockOrigin origin;
        pj.at("origin").get_to(origin.levels);
        CornerCode start;
        pj.at("start").get_to(start.bits);
        std::vector<int> perm;
        pj.at("perm").get_to(perm);
        ElementaryPath path = build_path(cfg, origin, start, perm);
        // The stored points are rederivable; verify they match.
        nlohmann::json points = nlohmann::json::array();
        for (const auto& pt : path.points) points.push_back(pt.levels);
        if (pj.contains("points") && pj.at("points") != points)
            throw ConfigError("plan.paths: stored points disagree with origin/start/perm");
        plan.sampling.paths.push_back(std::move(path));
    }
    plan.sampling.r = plan.sampling.paths.size();
    if (plan.sampling.r == 0) throw ConfigError("plan.paths: must not be empty");

    plan.model_spec = j.value("model", nlohmann::json::object());
    plan.copula_info = j.value("copula", nlohmann::json::object());
    plan.workers = j.value("workers", std::size_t{1});
    return plan;
}

// ---------------------------------------------------------------------------
// Run + analyze
// ---------------------------------------------------------------------------

struct RunOptions {
    std::size_t workers = 0;                   // 0: take the plan's value
    std::vector<EvaluationRecord> resume_from; // previous records to reuse
};

/// Evaluate all distinct plan points; returns records in deterministic plan
/// order so repeated runs are byte-identical apart from wall times.
inline std::vector<EvaluationRecord> run_plan(const CampaignPlan& plan, const RunOptions& options = {}) {
    auto model = make_model(plan.model_spec, plan.parameters);
    Evaluator::Options eval_opts;
    eval_opts.workers = options.workers > 0 ? options.workers : plan.workers;
    Evaluator evaluator(model, plan.parameters, plan.sampling.cfg, eval_opts);
    if (!options.resume_from.empty()) evaluator.preload(options.resume_from);
    const auto points = plan.sampling.evaluation_points();
    return evaluator.evaluate_all(points);
}

struct AnalysisResult {
    SensitivityReport report;
    EffectSet effects;
    std::size_t planned_points = 0;
    std::size_t distinct_points = 0;
};

/// Join records to the plan's evaluation points and compute the measures.
/// Missing points raise IncompleteRecordsError listing every absent key.
inline AnalysisResult analyze(const CampaignPlan& plan, const std::vector<EvaluationRecord>& records) {
    std::string model_id;
    for (const auto& r : records) {
        if (r.model_id.empty()) continue;
        if (model_id.empty()) model_id = r.model_id;
        else if (model_id != r.model_id)
            throw ConfigError("records: mixed model ids ('" + model_id + "' and '" + r.model_id + "')");
    }

    std::map<std::string, double> by_levels;
    for (const auto& r : records) by_levels.emplace(levels_key(r.levels), r.output);

    const auto points = plan.sampling.evaluation_points();
    std::vector<double> outputs;
    outputs.reserve(points.size());
    std::vector<std::string> missing;
    for (const auto& pt : points) {
        auto it = by_levels.find(levels_key(pt.levels));
        if (it == by_levels.end()) {
            const std::string key = levels_key(pt.levels);
            if (std::find(missing.begin(), missing.end(), key) == missing.end()) missing.push_back(key);
            outputs.push_back(0.0);
        } else {
            outputs.push_back(it->second);
        }
    }
    if (!missing.empty()) {
        std::string msg = "records are missing " + std::to_string(missing.size()) + " evaluation point(s): ";
        for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", (" : "(") + missing[i] + ")";
        throw IncompleteRecordsError(msg, missing);
    }

    AnalysisResult result;
    result.effects = elementary_effects(plan.sampling, outputs);
    result.report = measures(result.effects, plan.factor_names);
    result.planned_points = points.size();
    std::map<std::string, bool> distinct;
    for (const auto& pt : points) distinct.emplace(levels_key(pt.levels), true);
    result.distinct_points = distinct.size();
    return result;
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const CampaignPlan& plan, const AnalysisResult& analysis) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : analysis.report.rows) {
        nlohmann::json rj = row.to_json();
        rj["rank"] = analysis.report.rank_of(row.index);
        rows.push_back(rj);
    }
    nlohmann::json excluded = nlohmann::json::array();
    for (const auto& e : analysis.report.exclusions) excluded.push_back({{"path", e.path}, {"reason", e.reason}});
    return {{"format", "sift-report/1"},
            {"metadata",
             {{"levels", plan.sampling.cfg.p},
              {"step", plan.sampling.cfg.s},
              {"paths", plan.sampling.r},
              {"seed", plan.sampling.seed},
              {"copula", plan.copula_info},
              {"model", plan.model_spec.value("id", "")},
              {"evaluations", {{"planned", analysis.planned_points}, {"distinct", analysis.distinct_points}}},
              {"excluded_paths", excluded}}},
            {"rows", rows}};
}

inline void report_to_csv(const AnalysisResult& analysis, std::ostream& out) {
    out << "factor,mu,mu_star,sigma,combined,rank\n";
    std::size_t rank = 1;
    for (std::size_t idx : analysis.report.ranking) {
        const auto& row = analysis.report.rows[idx];
        out << row.name << ',' << format_double(row.mu) << ',' << format_double(row.mu_star) << ','
            << (row.sigma ? format_double(*row.sigma) : std::string{}) << ',' << format_double(row.combined) << ','
            << rank << "\n";
        ++rank;
    }
}

inline void report_to_svg(const AnalysisResult& analysis, std::ostream& out) {
    std::vector<ScatterPoint> pts;
    for (const auto& row : analysis.report.rows)
        pts.push_back({row.mu_star, row.sigma.value_or(0.0), row.name});
    write_scatter_svg(out, pts, "mu* (mean absolute elementary effect)", "sigma (elementary-effect std. dev.)",
                      "Sensitivity screening");
}

inline void print_ranking(const AnalysisResult& analysis, std::ostream& out) {
    for (const auto& e : analysis.report.exclusions)
        out << "warning: path " << e.path << " excluded (" << e.reason << ")\n";
    std::size_t width = 6;
    for (const auto& row : analysis.report.rows) width = std::max(width, row.name.size());
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-4s %-*s %12s %12s %12s\n", "rank", static_cast<int>(width), "factor", "mu",
                  "mu*", "sigma");
    out << buf;
    std::size_t rank = 1;
    for (std::size_t idx : analysis.report.ranking) {
        const auto& row = analysis.report.rows[idx];
        std::snprintf(buf, sizeof(buf), "%-4zu %-*s %12.5g %12.5g %12.5g\n", rank, static_cast<int>(width),
                      row.name.c_str(), row.mu, row.mu_star, row.sigma.value_or(0.0));
        out << buf;
        ++rank;
    }
}

// ---------------------------------------------------------------------------
// The shipped demonstration campaign
// ---------------------------------------------------------------------------

/// North-Sea-style deposition/erosion study: 14 parameters in 7 completely
/// rank-correlated pairs, screened on a 4-level grid with a 2-cell step and
/// 10 paths (80 runs of the bufferbox model).
inline const char* northsea_config_json() {
    return R"JSON({
  "parameters": [
    {"name": "V_sed_IM1",     "min": 5.04,  "baseline": 10.8,  "max": 43.2},
    {"name": "V_sed_IM2",     "min": 43.2,  "baseline": 86.4,  "max": 172.8},
    {"name": "V_sed_IM3",     "min": 0.1,   "baseline": 0.1,   "max": 5.04},
    {"name": "Fr_IM1_sed_S2", "min": 0.05,  "baseline": 0.15,  "max": 0.4},
    {"name": "Fr_IM2_sed_S2", "min": 0.05,  "baseline": 0.15,  "max": 0.4},
    {"name": "Fr_IM3_sed_S2", "min": 0.05,  "baseline": 0.15,  "max": 0.4},
    {"name": "V_res_IM1",     "min": 0.05,  "baseline": 0.2,   "max": 0.5},
    {"name": "V_res_IM2",     "min": 0.2,   "baseline": 1.0,   "max": 1.2},
    {"name": "V_res_IM3",     "min": 0.2,   "baseline": 1.0,   "max": 1.2},
    {"name": "Fact_res_Pup",  "min": 8e-9,  "baseline": 3e-8,  "max": 8e-8},
    {"name": "Tau_cr_S1_IM1", "min": 0.05,  "baseline": 0.1,   "max": 0.2},
    {"name": "Tau_cr_S1_IM2", "min": 0.05,  "baseline": 0.1,   "max": 0.2},
    {"name": "Tau_cr_S1_IM3", "min": 0.05,  "baseline": 0.1,   "max": 0.2},
    {"name": "Tau_Shields",   "min": 0.4,   "baseline": 0.8,   "max": 1.2}
  ],
  "correlations": {
    "scale": "spearman",
    "pairs": [
      {"a": "V_sed_IM1",    "b": "Fr_IM1_sed_S2", "rho": -1},
      {"a": "V_sed_IM2",    "b": "Fr_IM2_sed_S2", "rho": -1},
      {"a": "V_sed_IM3",    "b": "Fr_IM3_sed_S2", "rho": -1},
      {"a": "V_res_IM1",    "b": "Tau_cr_S1_IM1", "rho": 1},
      {"a": "V_res_IM2",    "b": "Tau_cr_S1_IM2", "rho": 1},
      {"a": "V_res_IM3",    "b": "Tau_cr_S1_IM3", "rho": 1},
      {"a": "Tau_Shields",  "b": "Fact_res_Pup",  "rho": 1}
    ]
  },
  "copula": "gaussian",
  "levels": 4,
  "step": 2,
  "paths": 10,
  "seed": 42,
  "model": {"id": "bufferbox", "objective": "mean"},
  "workers": 1,
  "corner_mode": "per_cell"
})JSON";
}

} // namespace sift
