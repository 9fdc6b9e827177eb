// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sift {

/// Invalid configuration, plan, or input file content. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A model evaluation failed: nonzero exit, timeout, unparsable output, non-finite result.
/// The CLI maps this to exit code 3.
class EvaluationError : public std::runtime_error {
public:
    explicit EvaluationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numeric routine could not reach its declared tolerance within its iteration budget.
class AccuracyError : public std::runtime_error {
public:
    explicit AccuracyError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Analysis was requested but the record set does not cover the plan.
/// Carries the list of missing point keys. The CLI maps this to exit code 4.
class IncompleteRecordsError : public std::runtime_error {
public:
    IncompleteRecordsError(const std::string& msg, std::vector<std::string> missing)
        : std::runtime_error(msg), missing_points(std::move(missing)) {}

    std::vector<std::string> missing_points;
};

} // namespace sift
