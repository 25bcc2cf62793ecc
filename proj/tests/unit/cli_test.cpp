#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "hesitant/io.hpp"
#include "hesitant/labels.hpp"
#include "hesitant/stats.hpp"
#include "hesitant/uq.hpp"
#include "temp_dir.hpp"

using namespace hesitant;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

json small_config(const fs::path& out_dir) {
    return {{"corpus",
             {{"synthetic",
               {{"n", 300},
                {"seed", 5},
                {"mix",
                 {{"CertainPositive", 0.35},
                  {"CertainNegative", 0.35},
                  {"ExplicitUncertain", 0.2},
                  {"BorderlineDisagreement", 0.1}}}}}}},
            {"features", {{"dim", 512}}},
            {"model", {{"hidden", 16}}},
            {"train", {{"learning_rate", 0.01}, {"batch_size", 32}}},
            {"uq", {{"mc_passes", 4}, {"ensemble_size", 3}}},
            {"analysis", {{"kfold", 2}, {"regime", "full_train"}}},
            {"output_dir", out_dir.string()}};
}

fs::path write_config(const testing_support::TempDir& dir, const json& config) {
    const auto path = dir / "exp.json";
    io::write_file(path, config.dump(2));
    return path;
}

std::set<std::string> listing(const fs::path& dir) {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
    return names;
}

} // namespace

TEST(Cli, NoSubcommandIsUsageError) {
    const auto r = invoke({});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    EXPECT_TRUE(r.out.empty());
}

TEST(Cli, UnknownSubcommandAndFlag) {
    auto r = invoke({"frobnicate"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    r = invoke({"gen", "--bogus", "1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, HelpGoesToStdout) {
    const auto r = invoke({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("correlate"), std::string::npos);
}

TEST(Cli, GenTwiceIsIdentical) {
    testing_support::TempDir dir("cli");
    ASSERT_EQ(invoke({"gen", "--n", "1000", "--seed", "7", "--out", (dir / "a").string()}).code, 0);
    ASSERT_EQ(invoke({"gen", "--n", "1000", "--seed", "7", "--out", (dir / "b").string()}).code, 0);
    for (const char* f : {"reports.jsonl", "labels.csv"}) {
        EXPECT_EQ(io::read_file(dir / "a" / f), io::read_file(dir / "b" / f)) << f;
    }
    auto config = json::parse(io::read_file(dir / "a/config.json"));
    auto other = json::parse(io::read_file(dir / "b/config.json"));
    EXPECT_EQ(config["output_dir"], (dir / "a").string());
    config.erase("output_dir");
    other.erase("output_dir");
    EXPECT_EQ(config, other);
    EXPECT_EQ(config["corpus"]["synthetic"]["n"], 1000);
    EXPECT_EQ(config["corpus"]["synthetic"]["seed"], 7);
}

TEST(Cli, FlagsOverrideConfig) {
    testing_support::TempDir dir("cli");
    const auto cfg = write_config(dir, small_config(dir / "out"));
    ASSERT_EQ(invoke({"gen", "--config", cfg.string(), "--n", "50", "--mix", "CertainNegative=1"}).code, 0);
    const auto echo = json::parse(io::read_file(dir / "out/config.json"));
    EXPECT_EQ(echo["corpus"]["synthetic"]["n"], 50);
    EXPECT_EQ(echo["corpus"]["synthetic"]["seed"], 5);
    EXPECT_EQ(echo["corpus"]["synthetic"]["mix"]["CertainNegative"], 1.0);
    EXPECT_EQ(echo["features"]["dim"], 512);
}

TEST(Cli, BadConfigValueIsValidationError) {
    testing_support::TempDir dir("cli");
    auto config = small_config(dir / "out");
    config["uq"]["mc_passes"] = 1;
    const auto cfg = write_config(dir, config);
    const auto r = invoke({"all", "--config", cfg.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("mc_passes"), std::string::npos);
}

TEST(Cli, MissingInputIsIoError) {
    testing_support::TempDir dir("cli");
    auto r = invoke({"prep", "--reports", (dir / "nope.jsonl").string(), "--labels", (dir / "nope.csv").string(),
                     "--out", (dir / "out").string()});
    EXPECT_EQ(r.code, 2);
    r = invoke({"all", "--config", (dir / "missing.json").string()});
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, CorrelateKeyMismatch) {
    testing_support::TempDir dir("cli");
    io::write_file(dir / "p.csv", "study_id,s0,s1\na,0.1,0.2\nb,0.5,0.6\nc,0.9,0.7\n");
    io::write_file(dir / "i.csv", "study_id,tld,chex_uncertain,neg_uncertain\na,1,0,0\nb,0,1,0\nz,0,0,1\n");
    const auto r = invoke({"correlate", "--predictions", (dir / "p.csv").string(), "--indicators",
                           (dir / "i.csv").string(), "--out", (dir / "out").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("key mismatch"), std::string::npos);
}

TEST(Cli, CorrelateExternalMatrix) {
    testing_support::TempDir dir("cli");
    io::write_file(dir / "p.csv", "study_id,s0,s1,s2\na,0.1,0.2,0.1\nb,0.5,0.6,0.3\nc,0.9,0.7,0.95\nd,0.02,0.01,0.03\n");
    io::write_file(dir / "i.csv", "study_id,tld,chex_uncertain,neg_uncertain\nd,0,0,0\nc,0,0,1\nb,1,1,0\na,0,0,0\n");
    auto r = invoke({"correlate", "--predictions", (dir / "p.csv").string(), "--indicators", (dir / "i.csv").string(),
                     "--samples", "2", "--out", (dir / "out").string()});
    EXPECT_EQ(r.code, 1);
    r = invoke({"correlate", "--predictions", (dir / "p.csv").string(), "--indicators", (dir / "i.csv").string(),
                "--out", (dir / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(io::read_file(dir / "out/correlations.json"));
    EXPECT_TRUE(doc["correlations"]["pe"]["external"]["tld"].is_object());
    EXPECT_TRUE(fs::exists(dir / "out/summaries_external.csv"));
}

TEST(Cli, AllWritesOnlyBelowOutputDirAndIsDeterministic) {
    testing_support::TempDir dir("cli");
    const auto cfg = write_config(dir, small_config(dir / "run/out"));
    const auto before = listing(dir.path());
    auto r = invoke({"all", "--config", cfg.string(), "--render"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Model performance"), std::string::npos);
    auto after = listing(dir.path());
    after.erase("run");
    EXPECT_EQ(after, before);
    EXPECT_EQ(listing(dir / "run"), (std::set<std::string>{"out"}));

    const auto first = io::read_file(dir / "run/out/report.json");
    ASSERT_EQ(invoke({"all", "--config", cfg.string(), "--out", (dir / "again").string()}).code, 0);
    EXPECT_EQ(io::read_file(dir / "again/report.json"), first);

    ASSERT_EQ(invoke({"report", "--dir", (dir / "again").string()}).code, 0);
    EXPECT_EQ(io::read_file(dir / "again/report.json"), first);
}

TEST(Cli, CorrelationCellsRecomputableFromExports) {
    testing_support::TempDir dir("cli");
    const auto cfg = write_config(dir, small_config(dir / "out"));
    ASSERT_EQ(invoke({"all", "--config", cfg.string()}).code, 0);
    const auto report = json::parse(io::read_file(dir / "out/report.json"));
    const auto indicators = load_indicators(dir / "out/indicators.csv");
    std::map<std::string, UncertaintyIndicator> by_id;
    for (const auto& i : indicators) by_id.emplace(i.study_id, i);
    int checked = 0;
    for (const std::string source : {"mc_dropout", "deep_ensemble"}) {
        std::ifstream in(dir / ("out/summaries_" + source + ".csv"));
        const auto summaries = parse_summaries(in);
        for (const std::string measure : {"pe", "psd"}) {
            for (const std::string column : {"tld", "chex_uncertain", "neg_uncertain"}) {
                std::vector<double> y;
                std::vector<int> x;
                for (const auto& s : summaries) {
                    y.push_back(measure == "pe" ? s.pe : s.psd);
                    const auto& ind = by_id.at(s.study_id);
                    x.push_back(column == "tld" ? ind.tld : column == "chex_uncertain" ? ind.chex_uncertain : ind.neg_uncertain);
                }
                const auto& cell = report["correlations"][measure][source][column];
                if (cell.is_null()) continue;
                const auto r = point_biserial(y, x);
                EXPECT_NEAR(cell["r_pb"].get<double>(), r.r_pb, 1e-10);
                EXPECT_NEAR(cell["p_value"].get<double>(), r.p_value, 1e-10);
                ++checked;
            }
        }
    }
    EXPECT_GT(checked, 0);
}

TEST(Cli, StagedPipeline) {
    testing_support::TempDir dir("cli");
    const auto out = (dir / "out").string();
    ASSERT_EQ(invoke({"gen", "--n", "300", "--seed", "3", "--out", out}).code, 0);
    auto r = invoke({"prep", "--out", out, "--dim", "512", "--strategy", "u_ones"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = invoke({"train", "--out", out, "--lr", "0.01", "--batch", "32"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = invoke({"train", "--out", out, "--ensemble", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "out/ensemble/member_02.ckpt"));
    r = invoke({"sample", "--out", out, "--method", "mc", "--passes", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = invoke({"sample", "--out", out, "--method", "ensemble"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = invoke({"eval", "--out", out, "--kfold", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(io::read_file(dir / "out/cv_metrics.json"))["cross_validation"]["k"], 3);
    r = invoke({"correlate", "--out", out, "--predictions", out + "/predictions_mc.csv", "--predictions",
                out + "/predictions_ensemble.csv", "--indicators", out + "/indicators.csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = invoke({"report", "--dir", out, "--render"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(io::read_file(dir / "out/report.json"));
    EXPECT_EQ(report["config"]["strategy"]["kind"], "u_ones");
    EXPECT_EQ(report["config"]["uq"]["mc_passes"], 5);
    EXPECT_TRUE(report["model_metrics"].contains("deep_ensemble"));
    EXPECT_EQ(report["cross_validation"]["k"], 3);
}

TEST(Cli, SampleWithoutModelIsIoError) {
    testing_support::TempDir dir("cli");
    const auto out = (dir / "out").string();
    ASSERT_EQ(invoke({"gen", "--n", "100", "--out", out}).code, 0);
    ASSERT_EQ(invoke({"prep", "--out", out, "--dim", "64"}).code, 0);
    EXPECT_EQ(invoke({"sample", "--out", out, "--method", "mc"}).code, 2);
    EXPECT_EQ(invoke({"sample", "--out", out, "--method", "bayes"}).code, 1);
}

TEST(Cli, ReportOnEmptyDirectory) {
    testing_support::TempDir dir("cli");
    const auto r = invoke({"report", "--dir", (dir / "empty").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(io::read_file(dir / "empty/report.json"));
    EXPECT_EQ(report["schema_version"], 1);
    EXPECT_TRUE(report["corpus"].empty());
}

TEST(Cli, StagedRunMatchesAll) {
    testing_support::TempDir dir("cli");
    const auto cfg = write_config(dir, small_config(dir / "unused"));
    const auto staged = (dir / "staged").string();
    const std::vector<std::vector<std::string>> steps{
        {"gen", "--config", cfg.string(), "--out", staged},
        {"prep", "--out", staged},
        {"train", "--out", staged},
        {"train", "--out", staged, "--ensemble", "3"},
        {"sample", "--out", staged, "--method", "mc"},
        {"sample", "--out", staged, "--method", "ensemble"},
        {"eval", "--out", staged},
        {"correlate", "--out", staged, "--indicators", staged + "/indicators.csv", "--predictions",
         staged + "/predictions_mc.csv", "--predictions", staged + "/predictions_ensemble.csv"},
        {"report", "--dir", staged},
    };
    for (const auto& step : steps) {
        const auto r = invoke(step);
        ASSERT_EQ(r.code, 0) << step[0] << ": " << r.err;
    }
    ASSERT_EQ(invoke({"all", "--config", cfg.string(), "--out", (dir / "whole").string()}).code, 0);
    EXPECT_EQ(io::read_file(dir / "staged/report.json"), io::read_file(dir / "whole/report.json"));
}
