#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "porcelain/cli.hpp"
#include "porcelain/io.hpp"
#include "support.hpp"

using namespace porcelain;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    ::unsetenv(cli::kOutDirEnv);
    dir = test::scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    demo = test::data_dir() / "demo";
    vocab = (test::data_dir() / "vocab").string();
  }
  fs::path dir, demo;
  std::string vocab;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kExitUsage);
  const auto r = run({"split", "--catalog", "x.csv", "--no-such-flag"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--catalog"), std::string::npos);
  EXPECT_EQ(run({"split"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"weights", "--counts", "c.csv", "--normalization", "odd"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"plan"}).code, cli::kExitUsage);
}

TEST_F(Cli, DataErrorsExitOne) {
  const auto r = run({"validate", "--catalog", (dir / "nope.csv").string(), "--vocab", vocab});
  EXPECT_EQ(r.code, cli::kExitDataError);
  EXPECT_NE(r.err.find("nope.csv"), std::string::npos);
  io::write_file_atomic(dir / "bad.json", "{not json");
  EXPECT_EQ(run({"plan", "synthetic", "--spec", (dir / "bad.json").string()}).code, cli::kExitDataError);
}

TEST_F(Cli, VersionAndHelpExitZero) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"--version"}, {"split", "--version"}, {"gate", "fid", "--version"}, {"--help"}, {"evaluate", "--help"}}) {
    const auto r = run(args);
    EXPECT_EQ(r.code, cli::kExitOk) << args.front();
    EXPECT_FALSE(r.out.empty());
  }
  EXPECT_NE(run({"--version"}).out.find("0.1.0"), std::string::npos);
}

TEST_F(Cli, ValidateWritesTheBundledHistogram) {
  const auto r = run({"validate", "--catalog", (demo / "catalog.csv").string(), "--vocab", vocab, "--out",
                      (dir / "report.json").string(), "--histogram-out", (dir / "hist.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "hist.csv"), slurp(demo / "histogram.csv"));
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report.at("records"), 3089);
  EXPECT_EQ(report.at("observed_combinations"), 61);
}

TEST_F(Cli, SplitIsByteIdenticalAcrossRuns) {
  const auto a = dir / "a.json", b = dir / "b.json";
  ASSERT_EQ(run({"split", "--catalog", (demo / "catalog.csv").string(), "--vocab", vocab, "--seed", "7",
                 "--out", a.string()}).code, 0);
  ASSERT_EQ(run({"split", "--catalog", (demo / "catalog.csv").string(), "--vocab", vocab, "--seed", "7",
                 "--out", b.string(), "--export-dir", (dir / "ids").string()}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_TRUE(fs::exists(dir / "ids" / "train.txt"));
}

TEST_F(Cli, SyntheticPlanAndPrompts) {
  const auto plan = dir / "plan.json";
  auto r = run({"plan", "synthetic", "--spec", (test::data_dir() / "specs" / "lora_selection.json").string(),
                "--histogram", (demo / "histogram.csv").string(), "--out", plan.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(plan)).at("total"), 1000);

  r = run({"prompts", "--plan", plan.string(), "--lexicon", (test::data_dir() / "lexicon.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1000);
  const auto again = run({"prompts", "--plan", plan.string(), "--lexicon",
                          (test::data_dir() / "lexicon.json").string()});
  EXPECT_EQ(again.out, r.out);
}

TEST_F(Cli, OutDirEnvironmentFallback) {
  ::setenv(cli::kOutDirEnv, dir.c_str(), 1);
  const auto r = run({"analyze", "--counts", (demo / "histogram.csv").string()});
  ::unsetenv(cli::kOutDirEnv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  bool wrote = false;
  for (const auto& e : fs::directory_iterator(dir)) wrote |= e.is_regular_file();
  EXPECT_TRUE(wrote);
}

TEST_F(Cli, EvaluateAndAggregate) {
  io::write_file_atomic(dir / "scores.csv", "0.9,0.1,0\n0.3,0.7,1\n0.6,0.4,1\n");
  std::vector<std::string> reports;
  for (const char* task : {"dynasty", "kiln", "glaze", "type"}) {
    const auto path = dir / (std::string(task) + ".json");
    const auto r = run({"evaluate", "--preds", (dir / "scores.csv").string(), "--task", task, "--topk", "1,2",
                        "--out", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    reports.push_back(path.string());
  }
  std::vector<std::string> args{"aggregate", "--reports"};
  args.insert(args.end(), reports.begin(), reports.end());
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  // Confusion [[1,0],[1,1]]: both classes have F1 2/3.
  const double macro = 2.0 / 3.0;
  EXPECT_NEAR(j.at("f1_avg").get<double>(), macro, 1e-12);
}

TEST_F(Cli, PipelineRunsEveryStage) {
  const auto r = run({"pipeline", "--config", (demo / "pipeline.json").string(), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) files += e.is_regular_file();
  EXPECT_GE(files, 6u);
}
