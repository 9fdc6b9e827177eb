// SPDX-License-Identifier: Apache-2.0
//
// sift: plan, execute and analyze dependence-aware screening campaigns.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sift/campaign.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitEvaluation = 3;
constexpr int kExitIncomplete = 4;

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sift::ConfigError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw sift::ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << text;
    if (!out) throw sift::EvaluationError("cannot write '" + path.string() + "'");
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> levels;
    std::optional<int> step;
    std::optional<std::size_t> paths;
    std::optional<std::string> copula;
    std::optional<std::size_t> workers;

    void apply(sift::CampaignConfig& cfg) const {
        if (seed) cfg.seed = *seed;
        if (levels) cfg.levels = *levels;
        if (step) cfg.step = *step;
        if (paths) cfg.paths = *paths;
        if (copula) cfg.copula_kind = *copula;
        if (workers) cfg.workers = *workers;
        cfg.validate();
    }
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Override the campaign seed");
    cmd->add_option("--levels", o.levels, "Override the number of grid levels p");
    cmd->add_option("--step", o.step, "Override the Morris step s (in cells)");
    cmd->add_option("--paths", o.paths, "Override the number of elementary paths r");
    cmd->add_option("--copula", o.copula, "Override the copula kind (gaussian|independence)");
    cmd->add_option("--workers", o.workers, "Override the evaluation worker count");
}

std::vector<sift::EvaluationRecord> maybe_resume(const fs::path& records_path) {
    if (!fs::exists(records_path)) return {};
    std::ifstream in(records_path);
    return sift::records_from_jsonl(in);
}

void do_run(const sift::CampaignPlan& plan, const fs::path& records_path, std::size_t workers, double timeout) {
    sift::CampaignPlan effective = plan;
    if (timeout > 0 && effective.model_spec.value("id", "") == "external")
        effective.model_spec["timeout_s"] = timeout;
    sift::RunOptions opts;
    opts.workers = workers;
    opts.resume_from = maybe_resume(records_path);
    const auto records = sift::run_plan(effective, opts);
    std::ostringstream out;
    sift::records_to_jsonl(records, out);
    write_text_file(records_path, out.str());
    std::printf("wrote %zu records to %s\n", records.size(), records_path.string().c_str());
}

void do_analyze(const sift::CampaignPlan& plan, const fs::path& records_path, const fs::path& out_dir) {
    std::ifstream in(records_path);
    if (!in) throw sift::ConfigError("cannot open '" + records_path.string() + "'");
    const auto records = sift::records_from_jsonl(in);
    const auto analysis = sift::analyze(plan, records);

    std::ostringstream csv, svg;
    sift::report_to_csv(analysis, csv);
    sift::report_to_svg(analysis, svg);
    write_text_file(out_dir / "report.csv", csv.str());
    write_text_file(out_dir / "report.json", sift::report_to_json(plan, analysis).dump(2) + "\n");
    write_text_file(out_dir / "report.svg", svg.str());

    sift::print_ranking(analysis, std::cout);
    std::printf("report written to %s\n", (out_dir / "report.csv").string().c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dependence-aware elementary-effects screening"};
    app.require_subcommand(1);

    // plan
    std::string plan_config, plan_out = "plan.json";
    Overrides plan_overrides;
    auto* cmd_plan = app.add_subcommand("plan", "Build a sampling plan from a campaign config");
    cmd_plan->add_option("--config", plan_config, "Campaign config JSON")->required();
    cmd_plan->add_option("--out", plan_out, "Plan output path");
    add_override_flags(cmd_plan, plan_overrides);

    // run
    std::string run_plan_path, run_out = "records.jsonl";
    std::size_t run_workers = 0;
    double run_timeout = 0.0;
    auto* cmd_run = app.add_subcommand("run", "Evaluate all plan points (resumes from existing records)");
    cmd_run->add_option("--plan", run_plan_path, "Plan JSON produced by 'plan'")->required();
    cmd_run->add_option("--out", run_out, "Records output path (JSON lines)");
    cmd_run->add_option("--workers", run_workers, "Evaluation worker count (default: plan value)");
    cmd_run->add_option("--timeout", run_timeout, "Per-evaluation timeout in seconds (external models)");

    // analyze
    std::string analyze_plan_path, analyze_records, analyze_out = ".";
    auto* cmd_analyze = app.add_subcommand("analyze", "Compute sensitivity measures and reports");
    cmd_analyze->add_option("--plan", analyze_plan_path, "Plan JSON")->required();
    cmd_analyze->add_option("--records", analyze_records, "Records JSON lines")->required();
    cmd_analyze->add_option("--out", analyze_out, "Output directory for report.{csv,json,svg}");

    // demo
    std::string demo_out = "demo-out";
    Overrides demo_overrides;
    auto* cmd_demo = app.add_subcommand("demo", "Run the shipped North-Sea-style bufferbox campaign end to end");
    cmd_demo->add_option("--out", demo_out, "Output directory");
    add_override_flags(cmd_demo, demo_overrides);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_plan->parsed()) {
            auto cfg = sift::config_from_json(load_json_file(plan_config));
            plan_overrides.apply(cfg);
            const auto plan = sift::make_plan(cfg);
            write_text_file(plan_out, sift::plan_to_json(plan).dump(2) + "\n");
            std::printf("plan: %zu factors, %zu paths, %zu evaluation points -> %s\n", plan.factor_names.size(),
                        plan.sampling.paths.size(), plan.sampling.n_evaluation_points(), plan_out.c_str());
        } else if (cmd_run->parsed()) {
            const auto plan = sift::plan_from_json(load_json_file(run_plan_path));
            do_run(plan, run_out, run_workers, run_timeout);
        } else if (cmd_analyze->parsed()) {
            const auto plan = sift::plan_from_json(load_json_file(analyze_plan_path));
            do_analyze(plan, analyze_records, analyze_out);
        } else if (cmd_demo->parsed()) {
            auto cfg = sift::config_from_json(nlohmann::json::parse(sift::northsea_config_json()));
            demo_overrides.apply(cfg);
            const fs::path out_dir = demo_out;
            write_text_file(out_dir / "config.json", sift::config_to_json(cfg).dump(2) + "\n");
            const auto plan = sift::make_plan(cfg);
            write_text_file(out_dir / "plan.json", sift::plan_to_json(plan).dump(2) + "\n");
            do_run(plan, out_dir / "records.jsonl", 0, 0.0);
            do_analyze(plan, out_dir / "records.jsonl", out_dir);
        }
    } catch (const sift::IncompleteRecordsError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIncomplete;
    } catch (const sift::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::overflow_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const sift::EvaluationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitEvaluation;
    } catch (const sift::AccuracyError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitEvaluation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
