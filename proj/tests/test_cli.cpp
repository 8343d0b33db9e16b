#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "dynreg/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string output;
};

Outcome cli(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() /
                       ("dynreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) +
                        ".log");
  const std::string command = env + " " + std::string(DYNREG_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, dynreg::read_file(log)};
}

std::string config(const char* name) { return (fs::path(DYNREG_CONFIG_DIR) / name).string(); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("dynreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

}  // namespace

TEST_F(CliTest, RunThenReportRoundTrips) {
  const auto run = cli("run " + config("static.json") + " --out " + dir.string());
  ASSERT_EQ(run.code, 0) << run.output;
  EXPECT_TRUE(fs::exists(dir / "trace.csv"));
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  const auto report = cli("report " + (dir / "trace.csv").string());
  EXPECT_EQ(report.code, 0) << report.output;
}

TEST_F(CliTest, EditedTraceCellFailsWithMetricName) {
  ASSERT_EQ(cli("run " + config("constant_drift.json") + " --out " + dir.string()).code, 0);
  std::string csv = dynreg::read_file(dir / "trace.csv");
  // Bump the f_value of round 5.
  std::size_t pos = 0;
  for (int i = 0; i < 5; ++i) pos = csv.find('\n', pos) + 1;
  std::size_t field = pos;
  for (int i = 0; i < 11; ++i) field = csv.find(',', field) + 1;
  csv.replace(field, 1, csv[field] == '9' ? "8" : "9");
  std::ofstream(dir / "trace.csv", std::ios::binary | std::ios::trunc) << csv;
  const auto report = cli("report " + (dir / "trace.csv").string());
  EXPECT_EQ(report.code, 2) << report.output;
  EXPECT_NE(report.output.find("dynamic_regret"), std::string::npos) << report.output;
}

TEST_F(CliTest, CorruptOrMissingTraceIsIoError) {
  ASSERT_EQ(cli("run " + config("static.json") + " --out " + dir.string()).code, 0);
  std::ofstream(dir / "trace.csv", std::ios::trunc) << "garbage\n";
  EXPECT_EQ(cli("report " + (dir / "trace.csv").string()).code, 1);
  EXPECT_EQ(cli("report " + (dir / "missing.csv").string()).code, 1);
}

TEST_F(CliTest, EtaAboveInverseSmoothnessIsUsageError) {
  fs::create_directories(dir);
  std::string text = dynreg::read_file(config("constant_drift.json"));
  text.replace(text.find("\"eta\": 1.0"), 10, "\"eta\": 1.5");
  std::ofstream(dir / "bad.json") << text;
  const auto run = cli("run " + (dir / "bad.json").string() + " --out " + dir.string());
  EXPECT_EQ(run.code, 1);
  EXPECT_NE(run.output.find("contraction precondition eta <= 1/L_loss"), std::string::npos) << run.output;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("run").code, 1);
  EXPECT_EQ(cli("run /nonexistent.json").code, 1);
  EXPECT_EQ(cli("sweep " + config("static.json") + " --horizons 10,x").code, 1);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST_F(CliTest, SelftestListsProperties) {
  const auto st = cli("selftest");
  EXPECT_EQ(st.code, 0) << st.output;
  int pass_lines = 0;
  for (std::size_t pos = st.output.find("PASS "); pos != std::string::npos; pos = st.output.find("PASS ", pos + 1))
    ++pass_lines;
  EXPECT_GE(pass_lines, 12);
  EXPECT_NE(st.output.find("contraction_counterexample"), std::string::npos);
  EXPECT_NE(st.output.find("expected violation observed"), std::string::npos);
}

TEST_F(CliTest, SweepWritesCsv) {
  const auto sw = cli("sweep " + config("omgd_smooth.json") + " --horizons 50,100 --out " + dir.string());
  ASSERT_EQ(sw.code, 0) << sw.output;
  const std::string csv = dynreg::read_file(dir / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(CliTest, SeedOffsetEnvironment) {
  const std::string args = "run " + config("simplex_walk.json") + " --out ";
  ASSERT_EQ(cli(args + (dir / "a").string()).code, 0);
  ASSERT_EQ(cli(args + (dir / "b").string(), "DYNREG_SEED_OFFSET=0").code, 0);
  ASSERT_EQ(cli(args + (dir / "c").string(), "DYNREG_SEED_OFFSET=5").code, 0);
  EXPECT_EQ(dynreg::read_file(dir / "a" / "trace.csv"), dynreg::read_file(dir / "b" / "trace.csv"));
  EXPECT_NE(dynreg::read_file(dir / "a" / "trace.csv"), dynreg::read_file(dir / "c" / "trace.csv"));
  EXPECT_EQ(cli(args + (dir / "d").string(), "DYNREG_SEED_OFFSET=abc").code, 1);
}

TEST_F(CliTest, RepetitionsWriteSeparateDirectories) {
  fs::create_directories(dir);
  std::string text = dynreg::read_file(config("simplex_walk.json"));
  text.insert(text.rfind('}'), ",\n  \"repetitions\": 3\n");
  std::ofstream(dir / "reps.json") << text;
  ASSERT_EQ(cli("run " + (dir / "reps.json").string() + " --out " + dir.string()).code, 0);
  for (int k = 0; k < 3; ++k) EXPECT_TRUE(fs::exists(dir / ("rep_" + std::to_string(k)) / "trace.csv"));
  EXPECT_NE(dynreg::read_file(dir / "rep_0" / "trace.csv"), dynreg::read_file(dir / "rep_1" / "trace.csv"));
}
