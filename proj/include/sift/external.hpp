// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <time.h>
#include <unistd.h>

#include <json.hpp>

#include "sift/errors.hpp"
#include "sift/model.hpp"

extern char** environ;

namespace sift {

/// Couples to a black-box simulator through the simplest possible protocol:
/// a JSON object {"parameters": {name: value, ...}} is written to a temp
/// file, the command is invoked as `<cmd> <file>`, and the model output is
/// the decimal scalar on the last non-empty line of stdout. Nonzero exit,
/// timeout, or unparsable output raise an EvaluationError carrying a stderr
/// excerpt.
class ExternalModel final : public Model {
public:
    struct Options {
        double timeout_seconds = 0.0; // 0 = no timeout
        std::string temp_dir;         // empty: $SIFT_TMPDIR, then the system default
    };

    ExternalModel(std::string command, std::vector<std::string> param_names)
        : ExternalModel(std::move(command), std::move(param_names), Options{}) {}

    ExternalModel(std::string command, std::vector<std::string> param_names, Options options)
        : command_(std::move(command)), names_(std::move(param_names)), options_(std::move(options)) {
        if (command_.empty()) throw ConfigError("external model: command must not be empty");
    }

    std::string id() const override { return "external:" + command_; }

    double evaluate(std::span<const double> x) const override {
        if (x.size() != names_.size())
            throw EvaluationError("external model: expected " + std::to_string(names_.size()) + " parameters");

        const auto dir = temp_dir();
        const auto tag = std::to_string(::getpid()) + "-" + std::to_string(counter_.fetch_add(1));
        const auto param_path = dir / ("sift-params-" + tag + ".json");
        const auto out_path = dir / ("sift-stdout-" + tag + ".txt");
        const auto err_path = dir / ("sift-stderr-" + tag + ".txt");

        nlohmann::json params = nlohmann::json::object();
        for (std::size_t i = 0; i < names_.size(); ++i) params[names_[i]] = x[i];
        {
            std::ofstream out(param_path);
            out << nlohmann::json{{"parameters", params}}.dump(2) << "\n";
            if (!out) throw EvaluationError("external model: cannot write parameter file " + param_path.string());
        }

        const int status = spawn_and_wait(param_path.string(), out_path.string(), err_path.string());
        const std::string stdout_text = slurp(out_path);
        const std::string stderr_text = slurp(err_path);
        std::error_code ec;
        std::filesystem::remove(param_path, ec);
        std::filesystem::remove(out_path, ec);
        std::filesystem::remove(err_path, ec);

        if (status == kTimedOut)
            throw EvaluationError("external model timed out after " + std::to_string(options_.timeout_seconds) +
                                  "s: " + command_ + excerpt(stderr_text));
        if (status != 0)
            throw EvaluationError("external model exited with status " + std::to_string(status) + ": " + command_ +
                                  excerpt(stderr_text));

        const std::string line = last_nonempty_line(stdout_text);
        if (line.empty())
            throw EvaluationError("external model produced no output: " + command_ + excerpt(stderr_text));
        char* end = nullptr;
        errno = 0;
        const double value = std::strtod(line.c_str(), &end);
        while (end && *end == ' ') ++end;
        if (errno != 0 || end == line.c_str() || (end && *end != '\0'))
            throw EvaluationError("external model output is not a decimal scalar: '" + line + "'" +
                                  excerpt(stderr_text));
        return value;
    }

    nlohmann::json describe() const override {
        return {{"id", "external"}, {"command", command_}, {"timeout_s", options_.timeout_seconds}};
    }

private:
    static constexpr int kTimedOut = -1000;

    std::filesystem::path temp_dir() const {
        if (!options_.temp_dir.empty()) return options_.temp_dir;
        if (const char* env = std::getenv("SIFT_TMPDIR")) return env;
        return std::filesystem::temp_directory_path();
    }

    static std::string slurp(const std::filesystem::path& path) {
        std::ifstream in(path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return text;
    }

    static std::string excerpt(const std::string& stderr_text) {
        if (stderr_text.empty()) return "";
        std::string trimmed = stderr_text.substr(0, 300);
        while (!trimmed.empty() && (trimmed.back() == '\n' || trimmed.back() == '\r')) trimmed.pop_back();
        return " (stderr: " + trimmed + ")";
    }

    static std::string last_nonempty_line(const std::string& text) {
        std::size_t end = text.size();
        while (end > 0) {
            std::size_t start = text.find_last_of('\n', end - 1);
            const std::size_t begin = start == std::string::npos ? 0 : start + 1;
            std::string line = text.substr(begin, end - begin);
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
                line.pop_back();
            std::size_t first = line.find_first_not_of(" \t");
            if (first != std::string::npos) return line.substr(first);
            if (start == std::string::npos) break;
            end = start;
        }
        return "";
    }

    int spawn_and_wait(const std::string& param_file, const std::string& out_file,
                       const std::string& err_file) const {
        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_addopen(&actions, 1, out_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
        posix_spawn_file_actions_addopen(&actions, 2, err_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);

        // Run through the shell so commands may carry their own flags.
        const std::string cmdline = command_ + " '" + param_file + "'";
        const char* argv[] = {"/bin/sh", "-c", cmdline.c_str(), nullptr};

        pid_t pid = -1;
        const int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char**>(argv), environ);
        posix_spawn_file_actions_destroy(&actions);
        if (rc != 0) throw EvaluationError(std::string("external model: cannot spawn: ") + std::strerror(rc));

        const double timeout = options_.timeout_seconds;
        double waited = 0.0;
        while (true) {
            int status = 0;
            const pid_t done = ::waitpid(pid, &status, timeout > 0 ? WNOHANG : 0);
            if (done == pid) {
                if (WIFEXITED(status)) return WEXITSTATUS(status);
                if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
                return -1;
            }
            if (done < 0) throw EvaluationError("external model: waitpid failed");
            constexpr double kPollSeconds = 0.005;
            struct timespec ts {0, static_cast<long>(kPollSeconds * 1e9)};
            ::nanosleep(&ts, nullptr);
            waited += kPollSeconds;
            if (timeout > 0 && waited >= timeout) {
                ::kill(pid, SIGKILL);
                ::waitpid(pid, nullptr, 0);
                return kTimedOut;
            }
        }
    }

    std::string command_;
    std::vector<std::string> names_;
    Options options_;
    mutable std::atomic<std::uint64_t> counter_{0};
};

} // namespace sift
