#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dynreg/harness.hpp"
#include "dynreg/selftest.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dynamic-regret experiments for uniclass online learners"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string horizons;
  std::string trace_path;
  std::string report_path;

  auto* run = app.add_subcommand("run", "Run one experiment config and write trace.csv and report.json");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (defaults to the config's output field)");

  auto* sweep = app.add_subcommand("sweep", "Run a config over several horizons and write sweep.csv");
  sweep->add_option("config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--horizons", horizons, "Comma-separated horizons, e.g. 100,1000,10000")->required();
  sweep->add_option("--out", out_dir, "Output directory");

  auto* selftest = app.add_subcommand("selftest", "Check the numerical properties the bounds rely on");

  auto* report = app.add_subcommand("report", "Recompute a report from a trace and compare with report.json");
  report->add_option("trace", trace_path, "trace.csv written by run")->required();
  report->add_option("--report", report_path, "report.json to compare (defaults to the trace's directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? dynreg::kExitOk : dynreg::kExitUsage;
  }

  dynreg::RunOptions options;
  try {
    options.seed_offset = dynreg::env_seed_offset();
  } catch (const std::exception& e) {
    std::cerr << "dynreg: " << e.what() << '\n';
    return dynreg::kExitUsage;
  }
  if (!out_dir.empty()) options.output = out_dir;

  if (*run) return dynreg::cmd_run(config_path, options, std::cout, std::cerr);
  if (*sweep) {
    std::vector<std::int64_t> hs;
    try {
      hs = dynreg::parse_horizons(horizons);
    } catch (const std::exception& e) {
      std::cerr << "dynreg sweep: " << e.what() << '\n';
      return dynreg::kExitUsage;
    }
    return dynreg::cmd_sweep(config_path, hs, options, std::cout, std::cerr);
  }
  if (*selftest) {
    try {
      return dynreg::cmd_selftest(std::cout);
    } catch (const std::exception& e) {
      std::cerr << "dynreg selftest: " << e.what() << '\n';
      return dynreg::kExitViolation;
    }
  }
  if (*report) {
    std::optional<std::filesystem::path> rp;
    if (!report_path.empty()) rp = report_path;
    return dynreg::cmd_report(trace_path, rp, std::cout, std::cerr);
  }
  return dynreg::kExitUsage;
}
