// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "sift/errors.hpp"

namespace sift {

/// Key of one observation: (time, location). Times are compared exactly, so
/// producers and consumers must derive them the same way (hour indices here).
using SeriesKey = std::pair<double, long>;

/// Model output series indexed like the reference data.
using SeriesMap = std::map<SeriesKey, double>;

/// Reference observations with an availability mask: an entry exists only
/// where a measurement is available; everything else is masked out.
class ReferenceSet {
public:
    void add(double time, long cell, double value) { values_.emplace(SeriesKey{time, cell}, value); }

    std::size_t size() const { return values_.size(); }
    const SeriesMap& values() const { return values_; }

    /// CSV with a `time,cell,value` header; absent rows are masked out.
    static ReferenceSet from_csv(std::istream& in) {
        ReferenceSet ref;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line == "\r") continue;
            if (line_no == 1 && line.rfind("time", 0) == 0) continue; // header
            std::istringstream ss(line);
            std::string t, c, v;
            if (!std::getline(ss, t, ',') || !std::getline(ss, c, ',') || !std::getline(ss, v))
                throw ConfigError("reference csv: malformed line " + std::to_string(line_no));
            try {
                ref.add(std::stod(t), std::stol(c), std::stod(v));
            } catch (const std::exception&) {
                throw ConfigError("reference csv: unparsable values at line " + std::to_string(line_no));
            }
        }
        return ref;
    }

    void to_csv(std::ostream& out) const {
        out << "time,cell,value\n";
        char buf[64];
        for (const auto& [key, value] : values_) {
            std::snprintf(buf, sizeof(buf), "%.17g,%ld,%.17g\n", key.first, key.second, value);
            out << buf;
        }
    }

private:
    SeriesMap values_;
};

/// Masked mean absolute error: the mean of |model - reference| over the
/// masked-in entries. Model values must exist and be finite wherever the
/// mask is on; masked-out model output never contributes.
inline double epsilon(const SeriesMap& model, const ReferenceSet& reference) {
    if (reference.size() == 0) throw EvaluationError("epsilon: reference set is empty, objective undefined");
    double sum = 0.0;
    for (const auto& [key, ref_value] : reference.values()) {
        auto it = model.find(key);
        if (it == model.end())
            throw EvaluationError("epsilon: model value missing at (t=" + std::to_string(key.first) +
                                  ", cell=" + std::to_string(key.second) + ")");
        if (!std::isfinite(it->second))
            throw EvaluationError("epsilon: non-finite model value at (t=" + std::to_string(key.first) +
                                  ", cell=" + std::to_string(key.second) + ")");
        sum += std::fabs(it->second - ref_value);
    }
    return sum / static_cast<double>(reference.size());
}

} // namespace sift
