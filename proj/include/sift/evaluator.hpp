// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sift/copula.hpp"
#include "sift/errors.hpp"
#include "sift/external.hpp"
#include "sift/grid.hpp"
#include "sift/model.hpp"

namespace sift {

/// One physical parameter: name, expert range, and its place in the
/// dependence structure (group index plus direction relative to the group's
/// representative).
struct ParameterSpec {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    double baseline = 0.0;
    std::size_t group = 0;
    int sign = +1;

    void validate() const {
        if (name.empty()) throw ConfigError("parameter: name must not be empty");
        if (!(min < max)) throw ConfigError("parameter " + name + ": min must be < max");
    }
};

/// Fill group/sign fields from the dependence model (parameter order must match).
inline void assign_groups(std::vector<ParameterSpec>& specs, const DependenceModel& model) {
    if (specs.size() != model.n_params())
        throw ConfigError("assign_groups: parameter count does not match the dependence model");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        specs[i].group = model.group_of(i);
        specs[i].sign = model.sign_of(i);
    }
}

/// Level of a member parameter given its group's level: +1 members track the
/// group axis, -1 members walk it mirrored (level + mirrored level = p-1).
inline int member_level(int group_level, int p, int sign) {
    return sign > 0 ? group_level : (p - 1) - group_level;
}

/// Map an effective-factor grid point to physical parameter values by linear
/// scaling of each member's unit coordinate onto [min, max].
inline std::vector<double> scale_point(const GridPoint& effective, std::span<const ParameterSpec> specs,
                                       const GridConfig& cfg) {
    std::vector<double> x(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        if (spec.group >= effective.levels.size())
            throw ConfigError("scale_point: parameter " + spec.name + " references an unknown group");
        const int lvl = member_level(effective.levels[spec.group], cfg.p, spec.sign);
        const double unit = static_cast<double>(lvl) / static_cast<double>(cfg.p - 1);
        x[i] = spec.min + unit * (spec.max - spec.min);
    }
    return x;
}

/// Build a model from its JSON description. `params` supplies the parameter
/// names (and count) the model will be called with.
inline std::shared_ptr<Model> make_model(const nlohmann::json& spec, const std::vector<ParameterSpec>& params) {
    if (!spec.contains("id")) throw ConfigError("model: missing 'id'");
    const std::string id = spec.at("id").get<std::string>();
    std::vector<std::string> names;
    names.reserve(params.size());
    for (const auto& p : params) names.push_back(p.name);

    if (id == "linear" || id == "quadratic") {
        std::vector<double> coeffs;
        if (spec.contains("coefficients")) {
            spec.at("coefficients").get_to(coeffs);
        } else {
            coeffs.assign(params.size(), 1.0);
        }
        if (coeffs.size() != params.size())
            throw ConfigError("model.coefficients: expected " + std::to_string(params.size()) + " entries, got " +
                              std::to_string(coeffs.size()));
        if (id == "linear") return std::make_shared<LinearModel>(std::move(coeffs), spec.value("intercept", 0.0));
        return std::make_shared<QuadraticModel>(std::move(coeffs));
    }
    if (id == "product") return std::make_shared<ProductModel>(spec.value("scale", 1.0));
    if (id == "bufferbox") {
        bufferbox::Scenario scenario =
            spec.contains("scenario") ? bufferbox::Scenario::from_json(spec.at("scenario")) : bufferbox::Scenario{};
        const std::string objective = spec.value("objective", "mean");
        if (objective == "mean") return std::make_shared<BufferboxModel>(std::move(names), scenario);
        if (objective == "epsilon") {
            if (!spec.contains("reference"))
                throw ConfigError("model.reference: epsilon objective requires a reference CSV path");
            const auto path = spec.at("reference").get<std::string>();
            std::ifstream in(path);
            if (!in) throw ConfigError("model.reference: cannot open '" + path + "'");
            return std::make_shared<BufferboxModel>(std::move(names), scenario, BufferboxModel::Objective::epsilon,
                                                    ReferenceSet::from_csv(in));
        }
        throw ConfigError("model.objective: must be 'mean' or 'epsilon', got '" + objective + "'");
    }
    if (id == "external") {
        if (!spec.contains("command")) throw ConfigError("model.command: required for external models");
        ExternalModel::Options opts;
        opts.timeout_seconds = spec.value("timeout_s", 0.0);
        opts.temp_dir = spec.value("temp_dir", std::string{});
        return std::make_shared<ExternalModel>(spec.at("command").get<std::string>(), std::move(names), opts);
    }
    throw ConfigError("model.id: unknown model '" + id + "'");
}

// ---------------------------------------------------------------------------
// Evaluation records + cached evaluator
// ---------------------------------------------------------------------------

/// Canonical decimal rendering used for hashing and serialization: 17
/// significant digits round-trip a double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// FNV-1a content hash of (model id, canonical parameter rendering); the
/// cache key and the resume join key.
inline std::string content_hash(const std::string& model_id, const std::vector<std::string>& names,
                                std::span<const double> values) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    mix(model_id);
    for (std::size_t i = 0; i < values.size(); ++i) {
        mix("|");
        mix(names[i]);
        mix("=");
        mix(format_double(values[i]));
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// One evaluated point: grid levels, physical values, output, provenance.
struct EvaluationRecord {
    std::vector<int> levels;
    std::vector<std::string> names;
    std::vector<double> values;
    double output = 0.0;
    double wall_ms = 0.0;
    std::string model_id;
    std::string hash;

    nlohmann::json to_json() const {
        nlohmann::json params = nlohmann::json::object();
        for (std::size_t i = 0; i < names.size(); ++i) params[names[i]] = values[i];
        return {{"levels", levels}, {"params", params},   {"value", output},
                {"wall_ms", wall_ms}, {"model", model_id}, {"hash", hash}};
    }
};

inline std::string levels_key(const std::vector<int>& levels) {
    std::string key;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i) key += ',';
        key += std::to_string(levels[i]);
    }
    return key;
}

/// Scales grid points, runs the model (optionally across a worker pool),
/// caches by content hash, and produces records in deterministic plan order
/// regardless of completion order.
class Evaluator {
public:
    struct Options {
        std::size_t workers = 1;
    };

    Evaluator(std::shared_ptr<const Model> model, std::vector<ParameterSpec> specs, GridConfig cfg)
        : Evaluator(std::move(model), std::move(specs), cfg, Options{}) {}

    Evaluator(std::shared_ptr<const Model> model, std::vector<ParameterSpec> specs, GridConfig cfg,
              Options options)
        : model_(std::move(model)), specs_(std::move(specs)), cfg_(cfg), options_(options) {
        names_.reserve(specs_.size());
        for (const auto& s : specs_) names_.push_back(s.name);
    }

    const std::vector<ParameterSpec>& specs() const { return specs_; }

    /// Seed the cache from prior records (resume support). Records from a
    /// different model id are ignored.
    void preload(const std::vector<EvaluationRecord>& records) {
        std::lock_guard<std::mutex> lock(mutex_);
        for (const auto& r : records)
            if (r.model_id == model_->id() && !r.hash.empty()) cache_.emplace(r.hash, r.output);
    }

    EvaluationRecord evaluate(const GridPoint& point) {
        EvaluationRecord record;
        record.levels = point.levels;
        record.names = names_;
        record.values = scale_point(point, specs_, cfg_);
        record.model_id = model_->id();
        record.hash = content_hash(record.model_id, names_, record.values);

        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(record.hash);
            if (it != cache_.end()) {
                ++cache_hits_;
                record.output = it->second;
                record.wall_ms = 0.0;
                return record;
            }
        }

        const auto t0 = std::chrono::steady_clock::now();
        const double value = model_->evaluate(record.values);
        const auto t1 = std::chrono::steady_clock::now();
        record.output = value;
        record.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

        {
            std::lock_guard<std::mutex> lock(mutex_);
            cache_.emplace(record.hash, value);
            ++model_calls_;
        }
        return record;
    }

    /// Evaluate the distinct points among `points` (first-occurrence order).
    /// Work is dispatched to `workers` threads; the returned records are in
    /// deterministic input order.
    std::vector<EvaluationRecord> evaluate_all(std::span<const GridPoint> points) {
        std::vector<GridPoint> distinct;
        std::map<std::vector<int>, std::size_t> seen;
        for (const auto& pt : points)
            if (seen.emplace(pt.levels, distinct.size()).second) distinct.push_back(pt);

        std::vector<EvaluationRecord> records(distinct.size());
        const std::size_t workers = std::min(std::max<std::size_t>(options_.workers, 1), distinct.size());
        if (workers <= 1) {
            for (std::size_t i = 0; i < distinct.size(); ++i) records[i] = evaluate(distinct[i]);
            return records;
        }

        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::mutex error_mutex;
        std::string first_error;
        auto worker = [&]() {
            while (!failed.load()) {
                const std::size_t i = next.fetch_add(1);
                if (i >= distinct.size()) return;
                try {
                    records[i] = evaluate(distinct[i]);
                } catch (const std::exception& e) {
                    {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (first_error.empty()) first_error = e.what();
                    }
                    failed.store(true);
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (failed.load()) throw EvaluationError(first_error);
        return records;
    }

    std::size_t model_calls() const { return model_calls_; }
    std::size_t cache_hits() const { return cache_hits_; }

private:
    std::shared_ptr<const Model> model_;
    std::vector<ParameterSpec> specs_;
    GridConfig cfg_;
    Options options_;
    std::vector<std::string> names_;
    std::map<std::string, double> cache_;
    std::mutex mutex_;
    std::size_t model_calls_ = 0;
    std::size_t cache_hits_ = 0;
};

inline void records_to_jsonl(const std::vector<EvaluationRecord>& records, std::ostream& out) {
    for (const auto& r : records) out << r.to_json().dump() << "\n";
}

inline std::vector<EvaluationRecord> records_from_jsonl(std::istream& in) {
    std::vector<EvaluationRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("records: invalid JSON at line " + std::to_string(line_no) + ": " + e.what());
        }
        EvaluationRecord r;
        try {
            j.at("levels").get_to(r.levels);
            r.output = j.at("value").get<double>();
            r.wall_ms = j.value("wall_ms", 0.0);
            r.model_id = j.value("model", "");
            r.hash = j.value("hash", "");
            if (j.contains("params"))
                for (const auto& [name, value] : j.at("params").items()) {
                    r.names.push_back(name);
                    r.values.push_back(value.get<double>());
                }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("records: missing field at line " + std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace sift
