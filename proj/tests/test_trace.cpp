#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "dynreg/harness.hpp"
#include "dynreg/trace_io.hpp"

using namespace dynreg;

namespace {

ExperimentConfig small_config() {
  auto c = load_config(std::filesystem::path(DYNREG_CONFIG_DIR) / "mixed_drift.json");
  c.scenario.horizon = 60;
  return c;
}

}  // namespace

TEST(FormatReal, RoundTripsExactly) {
  SplitMix64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300.0, 300.0));
    EXPECT_EQ(parse_real(format_real(v), 1), v);
  }
  EXPECT_EQ(format_real(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(format_real(-2.0).size(), format_real(3.0).size() + 1);
}

TEST(TraceCsv, HeaderLayout) {
  EXPECT_EQ(trace_header(2),
            "t,x_hat_0,x_hat_1,x_star_0,x_star_1,f_value,f_min,dist_before,dist_after,grad_at_min_norm,degraded");
}

TEST(TraceCsv, WriteParseWriteIsByteIdentical) {
  const auto run = run_experiment(small_config());
  const std::string csv = write_trace_csv(run.trace);
  const auto parsed = parse_trace_csv(csv);
  EXPECT_EQ(write_trace_csv(parsed), csv);
  ASSERT_EQ(parsed.rounds.size(), run.trace.rounds.size());
  for (std::size_t i = 0; i < parsed.rounds.size(); ++i) {
    EXPECT_EQ(parsed.rounds[i].action, run.trace.rounds[i].action);
    EXPECT_EQ(parsed.minimizers[i], run.trace.minimizers[i]);
    EXPECT_EQ(parsed.rounds[i].dist_after, run.trace.rounds[i].dist_after);
  }
}

TEST(TraceCsv, ReportFromParsedTraceIsBitIdentical) {
  const auto run = run_experiment(small_config());
  const auto parsed = parse_trace_csv(write_trace_csv(run.trace));
  const auto constants = constants_from_json(constants_to_json(run.constants));
  EXPECT_EQ(metrics_to_json(compute_report(parsed, constants)), metrics_to_json(run.report));
  EXPECT_EQ(metrics_to_json(run.report).dump(), metrics_to_json(compute_report(parsed, constants)).dump());
}

TEST(TraceCsv, MalformedInputsRejected) {
  const auto run = run_experiment(small_config());
  const std::string csv = write_trace_csv(run.trace);
  EXPECT_THROW(parse_trace_csv(""), TraceFormatError);
  EXPECT_THROW(parse_trace_csv("t,a,b\n1,2,3\n"), TraceFormatError);
  EXPECT_THROW(parse_trace_csv(trace_header(3) + "\n"), TraceFormatError);

  std::string bad_number = csv;
  bad_number.replace(bad_number.find('\n') + 3, 1, "x");
  EXPECT_THROW(parse_trace_csv(bad_number), TraceFormatError);

  std::string short_row = csv.substr(0, csv.rfind(','));
  EXPECT_THROW(parse_trace_csv(short_row), TraceFormatError);

  std::string skipped = csv;
  const auto second_row = skipped.find('\n', skipped.find('\n') + 1) + 1;
  skipped[second_row] = '7';
  EXPECT_THROW(parse_trace_csv(skipped), TraceFormatError);
}

TEST(ReportJson, ConstantsRoundTrip) {
  const auto run = run_experiment(small_config());
  const json j = constants_to_json(run.constants);
  EXPECT_EQ(constants_to_json(constants_from_json(json::parse(j.dump()))), j);
}

TEST(WriteRun, SameConfigGivesByteIdenticalFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "dynreg_trace_test";
  std::filesystem::remove_all(dir);
  const auto config = small_config();
  write_run(run_experiment(config), config.name, dir / "a");
  write_run(run_experiment(config), config.name, dir / "b");
  EXPECT_EQ(read_file(dir / "a" / "trace.csv"), read_file(dir / "b" / "trace.csv"));
  EXPECT_EQ(read_file(dir / "a" / "report.json"), read_file(dir / "b" / "report.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "a" / "trace.csv.tmp"));
  std::ostringstream out, err;
  EXPECT_EQ(cmd_report(dir / "a" / "trace.csv", std::nullopt, out, err), kExitOk) << err.str();
  std::filesystem::remove_all(dir);
}

TEST(WriteRun, SeedOffsetChangesRandomScenario) {
  auto config = small_config();
  config.scenario.drift = RandomWalk{0.05};
  const auto a = run_experiment(config, 0), b = run_experiment(config, 1);
  EXPECT_NE(write_trace_csv(a.trace), write_trace_csv(b.trace));
}

TEST(Sweep, CsvColumns) {
  auto config = small_config();
  const auto rows = run_sweep(config, {20, 40});
  const std::string csv = sweep_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "T,P_star,S_star,dynamic_regret,theorem1_rhs,theorem2_rhs,ratio_regret_over_P");
  EXPECT_EQ(rows[0].horizon, 20);
  EXPECT_EQ(rows[1].horizon, 40);
}

TEST(Sweep, ParseHorizons) {
  EXPECT_EQ(parse_horizons("100,1000,10_000"), (std::vector<std::int64_t>{100, 1000, 10000}));
  EXPECT_THROW(parse_horizons("100,abc"), UsageError);
  EXPECT_THROW(parse_horizons("0"), UsageError);
  EXPECT_THROW(parse_horizons(""), UsageError);
}
