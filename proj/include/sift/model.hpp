// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sift/bufferbox.hpp"
#include "sift/errors.hpp"
#include "sift/objective.hpp"

namespace sift {

/// A scalar-valued model over the physical parameter vector.
class Model {
public:
    virtual ~Model() = default;
    virtual std::string id() const = 0;
    virtual double evaluate(std::span<const double> x) const = 0;
    virtual nlohmann::json describe() const = 0;
};

class LinearModel final : public Model {
public:
    explicit LinearModel(std::vector<double> coeffs, double intercept = 0.0)
        : coeffs_(std::move(coeffs)), intercept_(intercept) {}

    std::string id() const override { return "linear"; }

    double evaluate(std::span<const double> x) const override {
        if (x.size() != coeffs_.size())
            throw EvaluationError("linear model: expected " + std::to_string(coeffs_.size()) + " parameters");
        double y = intercept_;
        for (std::size_t i = 0; i < x.size(); ++i) y += coeffs_[i] * x[i];
        return y;
    }

    nlohmann::json describe() const override {
        return {{"id", "linear"}, {"coefficients", coeffs_}, {"intercept", intercept_}};
    }

private:
    std::vector<double> coeffs_;
    double intercept_;
};

class QuadraticModel final : public Model {
public:
    explicit QuadraticModel(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

    std::string id() const override { return "quadratic"; }

    double evaluate(std::span<const double> x) const override {
        if (x.size() != coeffs_.size())
            throw EvaluationError("quadratic model: expected " + std::to_string(coeffs_.size()) + " parameters");
        double y = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) y += coeffs_[i] * x[i] * x[i];
        return y;
    }

    nlohmann::json describe() const override { return {{"id", "quadratic"}, {"coefficients", coeffs_}}; }

private:
    std::vector<double> coeffs_;
};

/// scale * product of all parameters; the minimal interaction test model.
class ProductModel final : public Model {
public:
    explicit ProductModel(double scale = 1.0) : scale_(scale) {}

    std::string id() const override { return "product"; }

    double evaluate(std::span<const double> x) const override {
        double y = scale_;
        for (double v : x) y *= v;
        return y;
    }

    nlohmann::json describe() const override { return {{"id", "product"}, {"scale", scale_}}; }

private:
    double scale_;
};

/// The desk-scale sediment buffer model. Parameters are bound by name to the
/// canonical deposition/erosion parameter set; names not supplied stay at
/// their baseline values. The scalar output is either the time-mean surface
/// SPM concentration or the masked mean absolute error against a reference.
class BufferboxModel final : public Model {
public:
    enum class Objective { mean_spm, epsilon };

    BufferboxModel(std::vector<std::string> param_names, bufferbox::Scenario scenario,
                   Objective objective = Objective::mean_spm, ReferenceSet reference = {})
        : names_(std::move(param_names)), scenario_(scenario), objective_(objective),
          reference_(std::move(reference)) {
        for (const auto& name : names_)
            if (slot_of(name) < 0)
                throw ConfigError("bufferbox model: unknown parameter '" + name + "'");
        if (objective_ == Objective::epsilon && reference_.size() == 0)
            throw ConfigError("bufferbox model: epsilon objective requires a reference set");
    }

    std::string id() const override { return objective_ == Objective::mean_spm ? "bufferbox" : "bufferbox+epsilon"; }

    /// The 14 canonical parameter names, table-ordered.
    static const std::vector<std::string>& canonical_names() {
        static const std::vector<std::string> names = {
            "V_sed_IM1",     "V_sed_IM2",     "V_sed_IM3",     "Fr_IM1_sed_S2", "Fr_IM2_sed_S2",
            "Fr_IM3_sed_S2", "V_res_IM1",     "V_res_IM2",     "V_res_IM3",     "Fact_res_Pup",
            "Tau_cr_S1_IM1", "Tau_cr_S1_IM2", "Tau_cr_S1_IM3", "Tau_Shields"};
        return names;
    }

    static bufferbox::Params params_from_named(const std::map<std::string, double>& values) {
        bufferbox::Params p = bufferbox::Params::baseline();
        for (const auto& [name, value] : values) {
            const int slot = slot_of(name);
            if (slot < 0) throw ConfigError("bufferbox model: unknown parameter '" + name + "'");
            if (slot < 3) p.v_sed[static_cast<std::size_t>(slot)] = value;
            else if (slot < 6) p.fr_sed2[static_cast<std::size_t>(slot - 3)] = value;
            else if (slot < 9) p.v_res[static_cast<std::size_t>(slot - 6)] = value;
            else if (slot == 9) p.fact_pup = value;
            else if (slot < 13) p.tau_cr1[static_cast<std::size_t>(slot - 10)] = value;
            else p.tau_shields = value;
        }
        return p;
    }

    double evaluate(std::span<const double> x) const override {
        if (x.size() != names_.size())
            throw EvaluationError("bufferbox model: expected " + std::to_string(names_.size()) + " parameters");
        std::map<std::string, double> named;
        for (std::size_t i = 0; i < names_.size(); ++i) named[names_[i]] = x[i];
        const auto result = bufferbox::run(params_from_named(named), scenario_);
        if (objective_ == Objective::mean_spm) return result.qoi_mean_c;
        SeriesMap series;
        for (std::size_t k = 0; k < result.hours.size(); ++k)
            series[{result.hours[k], 0}] = result.total_c[k];
        return epsilon(series, reference_);
    }

    nlohmann::json describe() const override { return {{"id", id()}, {"scenario", scenario_.to_json()}}; }

private:
    static int slot_of(const std::string& name) {
        const auto& names = canonical_names();
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }

    std::vector<std::string> names_;
    bufferbox::Scenario scenario_;
    Objective objective_;
    ReferenceSet reference_;
};

} // namespace sift
