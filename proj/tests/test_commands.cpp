#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_support.hpp"
#include "xg/commands.hpp"
#include "xg/explain.hpp"

using namespace xg;
using xg::testing::error_code_of;
using xg::testing::read_file;
using xg::testing::TempDir;
using xg::testing::write_file;

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int status = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const TempDir& dir, const std::string& args) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string command = std::string(XGOALS_BIN) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int raw = std::system(command.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, read_file(out), read_file(err)};
}

// Generated data under dir/gen with seasons 2017/2018 .. 2020/2021.
RunConfig generated(const TempDir& dir, std::size_t n = 4000) {
    RunConfig cfg;
    cfg.seed = 21;
    cfg.n = n;
    cfg.out = dir / "gen";
    cmd_generate(cfg);
    cfg.data = dir / "gen" / "shots.csv";
    cfg.test_seasons = {"2020/2021"};
    return cfg;
}

} // namespace

TEST(Generate, DeterministicFilesAndInteriorTruth) {
    TempDir dir;
    RunConfig cfg;
    cfg.seed = 5;
    cfg.n = 1000;
    cfg.out = dir / "a";
    cmd_generate(cfg);
    cfg.out = dir / "b";
    cmd_generate(cfg);
    for (auto name : {kShotsFile, kGroundTruthFile, kConfigFile}) {
        EXPECT_EQ(read_file(dir / "a" / std::string(name)), read_file(dir / "b" / std::string(name))) << name;
    }
    const auto load = load_csv(dir / "a" / "shots.csv");
    EXPECT_EQ(load.dataset.size(), 1000u);

    std::istringstream truth(read_file(dir / "a" / "ground_truth.csv"));
    std::string line;
    std::getline(truth, line);
    EXPECT_EQ(line, "row,p_true");
    std::size_t rows = 0;
    while (std::getline(truth, line)) {
        const double p = std::stod(line.substr(line.find(',') + 1));
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
        ++rows;
    }
    EXPECT_EQ(rows, 1000u);
}

TEST(Generate, SeedIsRequired) {
    TempDir dir;
    RunConfig cfg;
    cfg.out = dir.path();
    EXPECT_EQ(error_code_of([&] { cmd_generate(cfg); }), ErrorCode::UsageError);
    cfg.data = "x.csv";
    EXPECT_EQ(error_code_of([&] { cmd_train(cfg); }), ErrorCode::UsageError);
}

TEST(Train, ZoneApproachesEmbedFrozenModels) {
    TempDir dir;
    auto cfg = generated(dir);
    cfg.approach = Approach::SoftZones;
    cfg.out = dir / "soft";
    cmd_train(cfg);
    const auto soft = load_model(dir / "soft" / "model.json");
    ASSERT_TRUE(soft.spec && soft.spec->zone_model());
    EXPECT_TRUE(soft.spec->zone_model()->frozen());
    EXPECT_EQ(soft.spec->zone_model()->exponent(), 2.0);
    EXPECT_EQ(soft.spec->zone_model()->centers().size(), 16u);
    EXPECT_EQ(soft.settings.at("approach"), "soft-zones");
    EXPECT_TRUE(fs::exists(dir / "soft" / "training_report.txt"));
    EXPECT_TRUE(fs::exists(dir / "soft" / "effective_config.json"));

    cfg.approach = Approach::HardZones;
    cfg.cmeans_iterations = 50;
    cfg.out = dir / "hard";
    cmd_train(cfg);
    const auto hard = load_model(dir / "hard" / "model.json");
    EXPECT_EQ(hard.spec->zone_model()->exponent(), 1.001);
    EXPECT_EQ(hard.spec->representation(), Representation::HardZones);
    EXPECT_EQ(hard.settings.at("cmeans_iterations"), "50");
}

TEST(Train, NaiveSelfEvaluatesToOne) {
    TempDir dir;
    auto cfg = generated(dir);
    cfg.approach = Approach::Naive;
    cfg.out = dir / "naive";
    const auto model = cmd_train(cfg);
    EXPECT_TRUE(model.main_effects.empty());
    EXPECT_EQ(model.spec->representation(), Representation::Constant);

    cfg.models = {dir / "naive" / "model.json"};
    cfg.out = dir / "eval";
    const auto reports = cmd_evaluate(cfg);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].name, "naive");
    EXPECT_EQ(reports[0].report.nbs, 1.0);
    EXPECT_EQ(reports[0].report.nll, 1.0);
    EXPECT_EQ(reports[0].report.nece, 1.0);
    EXPECT_EQ(*reports[0].report.auc_roc, 0.5);
    EXPECT_NE(read_file(dir / "eval" / "report.txt").find("naive"), std::string::npos);
    const auto json = nlohmann::json::parse(read_file(dir / "eval" / "report.json"));
    EXPECT_FALSE(json.empty());
}

TEST(Evaluate, MissingFilesNameThePath) {
    TempDir dir;
    auto cfg = generated(dir, 500);
    cfg.models = {dir / "nope.json"};
    try {
        cmd_evaluate(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
        EXPECT_NE(std::string(e.what()).find("nope.json"), std::string::npos);
    }
    cfg.approach = Approach::Naive;
    cfg.out = dir / "naive";
    cmd_train(cfg);
    cfg.models = {dir / "naive" / "model.json"};
    cfg.data = dir / "missing.csv";
    try {
        cmd_evaluate(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
        EXPECT_NE(std::string(e.what()).find("missing.csv"), std::string::npos);
    }
}

TEST(Evaluate, ModelWithoutSpecIsIncompatible) {
    TempDir dir;
    auto cfg = generated(dir, 500);
    save_model(constant_model(0.1, FeatureSpec(Representation::Constant)), dir / "ok.json");
    GamModel bare;
    bare.intercept = -2.0;
    save_model(bare, dir / "bare.json");
    cfg.models = {dir / "bare.json"};
    cfg.out = dir / "eval";
    EXPECT_EQ(error_code_of([&] { cmd_evaluate(cfg); }), ErrorCode::IncompatibleArtifact);
}

TEST(Explain, ExportsEveryArtifact) {
    TempDir dir;
    auto cfg = generated(dir);
    cfg.out = dir / "soft";
    const auto model = cmd_train(cfg);
    cfg.models = {dir / "soft" / "model.json"};
    cfg.local = {0};
    cfg.out = dir / "explain";
    cmd_explain(cfg);

    std::size_t interactions = 0;
    for (const auto& e : fs::directory_iterator(dir / "explain" / "interactions")) interactions += e.is_regular_file();
    EXPECT_EQ(interactions, 25u);
    std::size_t shapes = 0;
    for (const auto& e : fs::directory_iterator(dir / "explain" / "shapes")) shapes += e.is_regular_file();
    EXPECT_EQ(shapes, 20u);
    EXPECT_TRUE(fs::exists(dir / "explain" / "importance.csv"));
    EXPECT_TRUE(fs::exists(dir / "explain" / "interactions" / "zone_6__type_shot_penalty_a0.csv"));
    EXPECT_TRUE(fs::exists(dir / "explain" / "local" / "shot_0.txt"));

    const auto local = nlohmann::json::parse(read_file(dir / "explain" / "local" / "shot_0.json"));
    double s = local["intercept"].get<double>();
    for (const auto& c : local["contributions"]) s += c["contribution"].get<double>();
    EXPECT_NEAR(s, local["score"].get<double>(), 1e-12);
    EXPECT_EQ(local["contributions"].size(), 45u);
    EXPECT_NEAR(logit(local["probability"].get<double>()), local["score"].get<double>(), 1e-9);
}

TEST(Explain, BadNamesFailBeforeWriting) {
    TempDir dir;
    auto cfg = generated(dir, 2000);
    cfg.out = dir / "soft";
    cmd_train(cfg);
    cfg.models = {dir / "soft" / "model.json"};
    cfg.out = dir / "explain";
    cfg.features = {"zone_99"};
    EXPECT_EQ(error_code_of([&] { cmd_explain(cfg); }), ErrorCode::UnknownFeature);
    cfg.features = {};
    cfg.pairs = {{"zone_14", "bodypart_foot_a0"}};
    EXPECT_EQ(error_code_of([&] { cmd_explain(cfg); }), ErrorCode::NotWhitelisted);
    cfg.pairs = {};
    cfg.local = {100000};
    EXPECT_EQ(error_code_of([&] { cmd_explain(cfg); }), ErrorCode::InvalidArgument);
    EXPECT_FALSE(fs::exists(dir / "explain"));
}

TEST(Approach, ParseAndPrint) {
    for (auto a : {Approach::SoftZones, Approach::HardZones, Approach::DistanceAngle, Approach::Naive}) {
        EXPECT_EQ(parse_approach(to_string(a)), a);
    }
    EXPECT_EQ(error_code_of([] { parse_approach("fuzzy"); }), ErrorCode::InvalidEnum);
    EXPECT_EQ(naive_prediction(0.25), sigmoid(logit(0.25)));
}

TEST(Cli, EndToEnd) {
    TempDir dir;
    const auto d = dir.path().string();
    ASSERT_EQ(run_cli(dir, "generate --seed 3 --n 3000 --out " + d + "/gen").status, 0);
    const std::string data = " --data " + d + "/gen/shots.csv --test-season 2020/2021";
    ASSERT_EQ(run_cli(dir, "train --seed 3 --approach distance-angle --out " + d + "/da" + data).status, 0);
    ASSERT_EQ(run_cli(dir, "train --seed 3 --approach naive --out " + d + "/naive" + data).status, 0);
    const auto eval = run_cli(dir, "evaluate --model " + d + "/da/model.json --model " + d +
                                       "/naive/model.json --out " + d + "/eval" + data);
    ASSERT_EQ(eval.status, 0) << eval.err;
    EXPECT_NE(eval.out.find("distance-angle"), std::string::npos);
    EXPECT_NE(eval.out.find("1.0000"), std::string::npos);
    EXPECT_EQ(eval.out, read_file(dir / "eval" / "report.txt"));
    const auto explain = run_cli(dir, "explain --model " + d + "/da/model.json --local 0 --local 3 --out " + d +
                                          "/explain" + data);
    ASSERT_EQ(explain.status, 0) << explain.err;
    EXPECT_TRUE(fs::exists(dir / "explain" / "local" / "shot_3.json"));
}

TEST(Cli, ErrorsAreSingleLinesWithCodes) {
    TempDir dir;
    const auto d = dir.path().string();
    auto r = run_cli(dir, "generate --n 10 --out " + d);
    EXPECT_EQ(r.status, 2);
    EXPECT_EQ(r.err.rfind("error: UsageError: ", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

    r = run_cli(dir, "");
    EXPECT_EQ(r.status, 2);

    r = run_cli(dir, "train --seed 1 --data " + d + "/missing.csv");
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(r.err.rfind("error: IoError: ", 0), 0u) << r.err;
    EXPECT_NE(r.err.find("missing.csv"), std::string::npos);
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

    write_file(dir / "bad.csv", std::string(kCsvHeader) + "\n94,34,knee,0,0,c,s,m,p\n");
    r = run_cli(dir, "train --seed 1 --data " + d + "/bad.csv");
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(r.err.rfind("error: InvalidEnum: ", 0), 0u) << r.err;
    EXPECT_NE(r.err.find("line 1"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfigFile) {
    TempDir dir;
    const auto d = dir.path().string();
    write_file(dir / "cfg.toml", "[generate]\nn = 50\nseed = 9\nout = \"" + d + "/from_config\"\n");
    auto r = run_cli(dir, "--config " + d + "/cfg.toml generate");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(load_csv(dir / "from_config" / "shots.csv").dataset.size(), 50u);
    r = run_cli(dir, "--config " + d + "/cfg.toml generate --n 70");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(load_csv(dir / "from_config" / "shots.csv").dataset.size(), 70u);
    const auto settings = nlohmann::json::parse(read_file(dir / "from_config" / "effective_config.json"));
    EXPECT_EQ(settings["n"], "70");
    EXPECT_EQ(settings["seed"], "9");
}
