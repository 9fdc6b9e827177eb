// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sift/evaluator.hpp"

namespace sift {
namespace {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("sift-test-" + std::to_string(::getpid()) + "-" +
                                             std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

void write_script(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    out << "#!/bin/sh\n" << body;
    out.close();
    fs::permissions(path, fs::perms::owner_all);
}

std::vector<ParameterSpec> unit_specs(std::size_t n) {
    std::vector<ParameterSpec> specs(n);
    for (std::size_t i = 0; i < n; ++i) {
        specs[i].name = "x" + std::to_string(i + 1);
        specs[i].min = 0.0;
        specs[i].max = 1.0;
        specs[i].group = i;
        specs[i].sign = +1;
    }
    return specs;
}

TEST(ScalePoint, TableEndpointsMapExactly) {
    // the first deposition velocity: range [5.04, 43.2], level 3 of p=4 is the max
    std::vector<ParameterSpec> specs(1);
    specs[0] = {"V_sed_IM1", 5.04, 43.2, 10.8, 0, +1};
    GridConfig cfg(1, 4, 1);
    EXPECT_DOUBLE_EQ(scale_point(GridPoint{{3}}, specs, cfg)[0], 43.2);
    EXPECT_DOUBLE_EQ(scale_point(GridPoint{{0}}, specs, cfg)[0], 5.04);
}

TEST(ScalePoint, AntiCorrelatedPairReflects) {
    // (V_sed_IM1, Fr_IM1_sed_S2) with rank correlation -1 share group 0;
    // the group at its top level drives V_sed to max and Fr to min
    std::vector<ParameterSpec> specs(2);
    specs[0] = {"V_sed_IM1", 5.04, 43.2, 10.8, 0, +1};
    specs[1] = {"Fr_IM1_sed_S2", 0.05, 0.4, 0.15, 0, -1};
    GridConfig cfg(1, 4, 1);
    const auto x = scale_point(GridPoint{{3}}, specs, cfg);
    EXPECT_DOUBLE_EQ(x[0], 43.2);
    EXPECT_DOUBLE_EQ(x[1], 0.05);
}

TEST(ScalePoint, MonotoneInGroupLevelPerSign) {
    std::vector<ParameterSpec> specs(2);
    specs[0] = {"up", 1.0, 3.0, 2.0, 0, +1};
    specs[1] = {"down", 10.0, 30.0, 20.0, 0, -1};
    GridConfig cfg(1, 5, 1);
    double prev_up = -1e300, prev_down = 1e300;
    for (int lvl = 0; lvl <= 4; ++lvl) {
        const auto x = scale_point(GridPoint{{lvl}}, specs, cfg);
        EXPECT_GT(x[0], prev_up);
        EXPECT_LT(x[1], prev_down);
        prev_up = x[0];
        prev_down = x[1];
        EXPECT_NEAR(member_level(lvl, 5, +1) + member_level(lvl, 5, -1), 4, 0);
    }
}

TEST(MakeModel, LinearEvaluation) {
    const auto specs = unit_specs(2);
    const auto model = make_model(nlohmann::json{{"id", "linear"}, {"coefficients", {2.0, -3.0}}}, specs);
    EXPECT_DOUBLE_EQ(model->evaluate(std::vector<double>{0.5, 0.5}), -0.5);
}

TEST(MakeModel, QuadraticAndProduct) {
    const auto specs = unit_specs(2);
    const auto quad = make_model(nlohmann::json{{"id", "quadratic"}, {"coefficients", {1.0, 2.0}}}, specs);
    EXPECT_DOUBLE_EQ(quad->evaluate(std::vector<double>{0.5, 0.5}), 0.25 + 0.5);
    const auto prod = make_model(nlohmann::json{{"id", "product"}, {"scale", 4.0}}, specs);
    EXPECT_DOUBLE_EQ(prod->evaluate(std::vector<double>{0.5, 0.25}), 0.5);
}

TEST(MakeModel, ValidationErrors) {
    const auto specs = unit_specs(2);
    EXPECT_THROW(make_model(nlohmann::json{{"id", "nope"}}, specs), ConfigError);
    EXPECT_THROW(make_model(nlohmann::json{{"id", "linear"}, {"coefficients", {1.0}}}, specs), ConfigError);
    EXPECT_THROW(make_model(nlohmann::json::object(), specs), ConfigError);
    EXPECT_THROW(make_model(nlohmann::json{{"id", "external"}}, specs), ConfigError);
}

TEST(MakeModel, BufferboxBaselineQoiIsFinitePositive) {
    std::vector<ParameterSpec> specs(1);
    specs[0] = {"V_sed_IM1", 5.04, 43.2, 10.8, 0, +1};
    const auto model = make_model(nlohmann::json{{"id", "bufferbox"}}, specs);
    const double qoi = model->evaluate(std::vector<double>{10.8}); // baseline value
    EXPECT_TRUE(std::isfinite(qoi));
    EXPECT_GT(qoi, 0.0);
    // frozen from the dt/10 reference run of the default scenario
    EXPECT_NEAR(qoi, 4.5097791483427647, 5e-4 * 4.51);
}

TEST(MakeModel, BufferboxEpsilonAgainstSyntheticReference) {
    // synthetic reference: the baseline run itself, written out as CSV
    TempDir dir;
    const auto ref_path = dir.path() / "reference.csv";
    {
        const auto result = bufferbox::run(bufferbox::Params::baseline(), bufferbox::Scenario{});
        ReferenceSet ref;
        for (std::size_t k = 0; k < result.hours.size(); ++k) ref.add(result.hours[k], 0, result.total_c[k]);
        std::ofstream out(ref_path);
        ref.to_csv(out);
    }

    std::vector<ParameterSpec> specs(1);
    specs[0] = {"V_sed_IM1", 5.04, 43.2, 10.8, 0, +1};
    const auto model = make_model(
        nlohmann::json{{"id", "bufferbox"}, {"objective", "epsilon"}, {"reference", ref_path.string()}}, specs);

    // the generating parameters reproduce the reference exactly
    EXPECT_NEAR(model->evaluate(std::vector<double>{10.8}), 0.0, 1e-12);
    // perturbing the settling velocity moves the error off zero
    EXPECT_GT(model->evaluate(std::vector<double>{43.2}), 0.01);
}

TEST(Evaluator, CacheMakesRepeatEvaluationsFree) {
    const auto specs = unit_specs(2);
    GridConfig cfg(2, 4, 1);
    Evaluator ev(std::make_shared<ProductModel>(), specs, cfg);
    const GridPoint pt{{1, 2}};
    const auto a = ev.evaluate(pt);
    const auto b = ev.evaluate(pt);
    EXPECT_EQ(ev.model_calls(), 1u);
    EXPECT_EQ(ev.cache_hits(), 1u);
    EXPECT_DOUBLE_EQ(a.output, b.output);
    EXPECT_EQ(a.hash, b.hash);
}

TEST(Evaluator, EvaluateAllDedupsAndKeepsOrder) {
    const auto specs = unit_specs(2);
    GridConfig cfg(2, 4, 1);
    Evaluator ev(std::make_shared<ProductModel>(), specs, cfg);
    std::vector<GridPoint> points{{{0, 0}}, {{1, 1}}, {{0, 0}}, {{2, 3}}};
    const auto records = ev.evaluate_all(points);
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(records[0].levels, (std::vector<int>{0, 0}));
    EXPECT_EQ(records[1].levels, (std::vector<int>{1, 1}));
    EXPECT_EQ(records[2].levels, (std::vector<int>{2, 3}));
    EXPECT_EQ(ev.model_calls(), 3u);
}

TEST(Evaluator, ParallelMatchesSequential) {
    const auto specs = unit_specs(3);
    GridConfig cfg(3, 5, 1);
    std::vector<GridPoint> points;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) points.push_back(GridPoint{{a, b, (a + b) % 5}});

    Evaluator seq(std::make_shared<QuadraticModel>(std::vector<double>{1, 2, 3}), specs, cfg);
    Evaluator::Options par_opts;
    par_opts.workers = 4;
    Evaluator par(std::make_shared<QuadraticModel>(std::vector<double>{1, 2, 3}), specs, cfg, par_opts);
    const auto rs = seq.evaluate_all(points);
    const auto rp = par.evaluate_all(points);
    ASSERT_EQ(rs.size(), rp.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
        EXPECT_EQ(rs[i].levels, rp[i].levels);
        EXPECT_DOUBLE_EQ(rs[i].output, rp[i].output);
    }
}

TEST(Evaluator, PreloadSkipsKnownPoints) {
    const auto specs = unit_specs(2);
    GridConfig cfg(2, 4, 1);
    Evaluator first(std::make_shared<ProductModel>(), specs, cfg);
    const auto records = first.evaluate_all(std::vector<GridPoint>{{{0, 1}}, {{2, 2}}});

    Evaluator second(std::make_shared<ProductModel>(), specs, cfg);
    second.preload(records);
    second.evaluate(GridPoint{{0, 1}});
    EXPECT_EQ(second.model_calls(), 0u);
    EXPECT_EQ(second.cache_hits(), 1u);
}

TEST(Records, JsonlRoundTrip) {
    const auto specs = unit_specs(2);
    GridConfig cfg(2, 4, 1);
    Evaluator ev(std::make_shared<LinearModel>(std::vector<double>{1.0, -1.0}), specs, cfg);
    const auto records = ev.evaluate_all(std::vector<GridPoint>{{{0, 3}}, {{3, 0}}});

    std::ostringstream out;
    records_to_jsonl(records, out);
    std::istringstream in(out.str());
    const auto back = records_from_jsonl(in);
    ASSERT_EQ(back.size(), records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(back[i].levels, records[i].levels);
        EXPECT_DOUBLE_EQ(back[i].output, records[i].output);
        EXPECT_EQ(back[i].hash, records[i].hash);
        EXPECT_EQ(back[i].model_id, records[i].model_id);
    }
}

TEST(Records, MalformedJsonlRejected) {
    std::istringstream bad("{\"levels\": [0], \"value\": 1}\nnot json\n");
    EXPECT_THROW(records_from_jsonl(bad), ConfigError);
    std::istringstream missing("{\"value\": 1}\n");
    EXPECT_THROW(records_from_jsonl(missing), ConfigError);
}

TEST(ContentHash, SensitiveToValuesAndModel) {
    const std::vector<std::string> names{"a", "b"};
    const std::vector<double> x{0.25, 0.5};
    const std::vector<double> y{0.25, 0.5000000000000001};
    EXPECT_NE(content_hash("m", names, x), content_hash("m", names, y));
    EXPECT_NE(content_hash("m1", names, x), content_hash("m2", names, x));
    EXPECT_EQ(content_hash("m", names, x), content_hash("m", names, std::vector<double>{0.25, 0.5}));
}

// ---------------------------------------------------------------------------
// External model protocol
// ---------------------------------------------------------------------------

TEST(ExternalModel, ReadsScalarFromLastNonEmptyLine) {
    TempDir dir;
    const auto script = dir.path() / "model.sh";
    // prints chatter first; the scalar is the last non-empty line
    write_script(script, "echo 'starting up'\necho 42.5\necho ''\n");
    ExternalModel model(script.string(), {"x1"});
    EXPECT_DOUBLE_EQ(model.evaluate(std::vector<double>{0.3}), 42.5);
}

TEST(ExternalModel, ParameterFileCarriesNamedValues) {
    TempDir dir;
    const auto script = dir.path() / "model.sh";
    // echo the file back to stderr for inspection, output the x2 value via python-free jq-free parsing:
    // just sum check: we verify the JSON file contains the exact rendering by grepping.
    write_script(script,
                 "grep -q '\"x1\": 0.25' \"$1\" || { echo 'missing x1' >&2; exit 9; }\n"
                 "grep -q '\"parameters\"' \"$1\" || exit 9\n"
                 "echo 1.0\n");
    ExternalModel model(script.string(), {"x1", "x2"});
    EXPECT_DOUBLE_EQ(model.evaluate(std::vector<double>{0.25, 0.75}), 1.0);
}

TEST(ExternalModel, NonzeroExitCarriesStderr) {
    TempDir dir;
    const auto script = dir.path() / "model.sh";
    write_script(script, "echo 'solver diverged' >&2\nexit 3\n");
    ExternalModel model(script.string(), {"x1"});
    try {
        model.evaluate(std::vector<double>{0.1});
        FAIL() << "expected EvaluationError";
    } catch (const EvaluationError& e) {
        EXPECT_NE(std::string(e.what()).find("status 3"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("solver diverged"), std::string::npos);
    }
}

TEST(ExternalModel, UnparsableOutputRejected) {
    TempDir dir;
    const auto script = dir.path() / "model.sh";
    write_script(script, "echo 'not a number'\n");
    ExternalModel model(script.string(), {"x1"});
    EXPECT_THROW(model.evaluate(std::vector<double>{0.1}), EvaluationError);
}

TEST(ExternalModel, TimeoutKillsSlowProcess) {
    TempDir dir;
    const auto script = dir.path() / "model.sh";
    write_script(script, "sleep 30\necho 1.0\n");
    ExternalModel::Options opts;
    opts.timeout_seconds = 0.2;
    ExternalModel model(script.string(), {"x1"}, opts);
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_THROW(model.evaluate(std::vector<double>{0.1}), EvaluationError);
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(elapsed, 5.0);
}

TEST(ExternalModel, TempDirEnvOverrideRespected) {
    TempDir dir;
    const auto override_dir = dir.path() / "override";
    fs::create_directories(override_dir);
    const auto script = dir.path() / "model.sh";
    const auto probe = dir.path() / "probe.txt";
    write_script(script, "dirname \"$1\" > '" + probe.string() + "'\necho 1.0\n");

    ::setenv("SIFT_TMPDIR", override_dir.c_str(), 1);
    ExternalModel model(script.string(), {"x1"});
    EXPECT_DOUBLE_EQ(model.evaluate(std::vector<double>{0.5}), 1.0);
    ::unsetenv("SIFT_TMPDIR");

    std::ifstream in(probe);
    std::string seen_dir;
    std::getline(in, seen_dir);
    EXPECT_EQ(fs::path(seen_dir), override_dir);
}

TEST(ExternalModel, CacheContractOneCallForRepeatedPoint) {
    TempDir dir;
    const auto script = dir.path() / "model.sh";
    const auto calls = dir.path() / "calls.txt";
    write_script(script, "echo x >> '" + calls.string() + "'\necho 2.5\n");

    std::vector<ParameterSpec> specs = unit_specs(1);
    GridConfig cfg(1, 4, 1);
    Evaluator ev(std::make_shared<ExternalModel>(script.string(), std::vector<std::string>{"x1"}), specs, cfg);
    ev.evaluate(GridPoint{{2}});
    ev.evaluate(GridPoint{{2}});

    std::ifstream in(calls);
    std::string line;
    int count = 0;
    while (std::getline(in, line)) ++count;
    EXPECT_EQ(count, 1);
}

} // namespace
} // namespace sift
