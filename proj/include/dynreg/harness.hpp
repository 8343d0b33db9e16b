#ifndef DYNREG_HARNESS_HPP
#define DYNREG_HARNESS_HPP

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dynreg/config.hpp"
#include "dynreg/metrics.hpp"
#include "dynreg/scenario.hpp"
#include "dynreg/trace_io.hpp"

namespace dynreg {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitViolation = 2 };

struct RunArtifacts {
  Scenario scenario;
  ResolvedLearner learner;
  ExperimentTrace trace;
  ReportConstants constants;
  BoundReport report;
};

/// Seed offset from DYNREG_SEED_OFFSET, 0 when unset.
inline std::uint64_t env_seed_offset() {
  const char* v = std::getenv("DYNREG_SEED_OFFSET");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(v, &end, 10);
  if (*end != '\0') throw UsageError("DYNREG_SEED_OFFSET must be a nonnegative integer");
  return parsed;
}

/// Generates the scenario, plays every round, and evaluates the report.
inline RunArtifacts run_experiment(const ExperimentConfig& config, std::uint64_t seed_offset = 0,
                                   ResolveOptions resolve = {}) {
  RunArtifacts run;
  ScenarioSpec spec = config.scenario;
  spec.seed += seed_offset;
  run.scenario = make_scenario(spec);
  run.learner = resolve_learner(config.learner, spec.set, run.scenario.lipschitz_K, resolve);

  MinimizerOracle oracle;
  oracle.use_solver = config.oracle.use_solver;
  oracle.solve.tol = config.oracle.tol;
  oracle.solve.max_iter = config.oracle.max_iter;

  Learner learner(run.learner, spec.set, oracle);
  run.trace.rounds.reserve(run.scenario.costs.size());
  for (const auto& f : run.scenario.costs) run.trace.rounds.push_back(learner.play(f));
  run.trace.minimizers = run.scenario.minimizers;

  json scenario_json = config.scenario_json;
  scenario_json["seed"] = spec.seed;
  scenario_json["horizon"] = spec.horizon;
  run.trace.scenario_digest = digest(scenario_json);
  run.trace.config_digest = digest(config.learner_json);

  const auto comparator = static_comparator(run.scenario.costs, spec.set);
  const auto variation = variation_estimate(run.scenario.costs, spec.set);

  ReportConstants& c = run.constants;
  c.algorithm = to_string(config.learner.algorithm);
  c.lipschitz_K = run.scenario.lipschitz_K;
  c.smooth_L = run.scenario.smooth_L;
  c.rho = run.learner.rho_per_round;
  if (config.learner.algorithm == Algorithm::uniclass_omgd) {
    const double lambda = *config.learner.loss.strong_modulus();
    c.halving_guaranteed = run.learner.inner_iterations >= auto_inner_iterations(lambda, run.learner.eta);
  }
  c.static_comparator_value = comparator.value;
  c.static_estimated = comparator.estimated;
  c.variation = variation.value;
  c.variation_exact = variation.exact;
  c.check_contraction = config.assertions.check_contraction;
  c.check_theorem1 = config.assertions.check_theorem1;
  c.check_theorem2 = config.assertions.check_theorem2;

  run.report = compute_report(run.trace, c);
  return run;
}

namespace detail {

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> read_optional(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace detail

inline json constants_to_json(const ReportConstants& c) {
  return json{{"algorithm", c.algorithm},
              {"lipschitz_K", c.lipschitz_K},
              {"smooth_L", detail::optional_number(c.smooth_L)},
              {"rho", detail::optional_number(c.rho)},
              {"halving_guaranteed", c.halving_guaranteed},
              {"static_comparator_value", c.static_comparator_value},
              {"static_estimated", c.static_estimated},
              {"variation", c.variation},
              {"variation_exact", c.variation_exact},
              {"check_contraction", c.check_contraction},
              {"check_theorem1", c.check_theorem1},
              {"check_theorem2", c.check_theorem2}};
}

inline ReportConstants constants_from_json(const json& j) {
  ReportConstants c;
  c.algorithm = j.at("algorithm").get<std::string>();
  c.lipschitz_K = j.at("lipschitz_K").get<double>();
  c.smooth_L = detail::read_optional(j, "smooth_L");
  c.rho = detail::read_optional(j, "rho");
  c.halving_guaranteed = j.at("halving_guaranteed").get<bool>();
  c.static_comparator_value = j.at("static_comparator_value").get<double>();
  c.static_estimated = j.at("static_estimated").get<bool>();
  c.variation = j.at("variation").get<double>();
  c.variation_exact = j.at("variation_exact").get<bool>();
  c.check_contraction = j.at("check_contraction").get<bool>();
  c.check_theorem1 = j.at("check_theorem1").get<bool>();
  c.check_theorem2 = j.at("check_theorem2").get<bool>();
  return c;
}

inline json metrics_to_json(const BoundReport& r) {
  return json{{"dynamic_regret", r.dynamic_regret},
              {"static_regret", r.static_regret},
              {"P_star", r.P_star},
              {"S_star", r.S_star},
              {"V_f", r.V_f},
              {"V_f_label", r.V_f_exact ? "exact" : "sampled lower estimate"},
              {"G_star", r.G_star},
              {"rho_used", detail::optional_number(r.rho_used)},
              {"theorem1_rhs", detail::optional_number(r.theorem1_rhs)},
              {"theorem2_rhs", detail::optional_number(r.theorem2_rhs)},
              {"alpha_star", detail::optional_number(r.alpha_star)},
              {"per_round_contraction_max", r.per_round_contraction_max},
              {"aggregate_distance", r.aggregate_distance},
              {"initial_distance", r.initial_distance},
              {"degraded_rounds", r.degraded_rounds}};
}

inline json violations_to_json(const std::vector<Violation>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back({{"check", v.check}, {"round", v.round}, {"lhs", v.lhs}, {"rhs", v.rhs}});
  return out;
}

inline json report_to_json(const RunArtifacts& run, const std::string& name) {
  return json{{"name", name},
              {"scenario_digest", run.trace.scenario_digest},
              {"config_digest", run.trace.config_digest},
              {"rounds", run.trace.rounds.size()},
              {"dimension", run.scenario.minimizers.empty() ? 0 : run.scenario.minimizers.front().size()},
              {"learner", {{"eta", run.learner.eta}, {"inner_iterations", run.learner.inner_iterations}}},
              {"constants", constants_to_json(run.constants)},
              {"metrics", metrics_to_json(run.report)},
              {"violations", violations_to_json(run.report.violations)},
              {"passed", run.report.violations.empty()}};
}

/// Writes trace.csv and report.json into `dir`.
inline void write_run(const RunArtifacts& run, const std::string& name, const std::filesystem::path& dir) {
  write_file_atomic(dir / "trace.csv", write_trace_csv(run.trace));
  write_file_atomic(dir / "report.json", report_to_json(run, name).dump(2) + "\n");
}

inline void print_summary(std::ostream& out, const std::string& label, const BoundReport& r) {
  out << label << ": dynamic_regret=" << format_real(r.dynamic_regret) << " P*=" << format_real(r.P_star)
      << " S*=" << format_real(r.S_star);
  if (r.theorem1_rhs) out << " theorem1_rhs=" << format_real(*r.theorem1_rhs);
  if (r.theorem2_rhs) out << " theorem2_rhs=" << format_real(*r.theorem2_rhs);
  out << " violations=" << r.violations.size() << '\n';
  for (const auto& v : r.violations) {
    out << "  violation " << v.check;
    if (v.round) out << " at round " << v.round;
    out << ": " << format_real(v.lhs) << " > " << format_real(v.rhs) << '\n';
  }
}

struct RunOptions {
  std::optional<std::filesystem::path> output;
  std::uint64_t seed_offset = 0;
};

/// `dynreg run`: 0 when every enabled assertion holds, 2 on violations, 1 on usage/IO errors.
inline int cmd_run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out,
                   std::ostream& err) {
  try {
    const ExperimentConfig config = load_config(config_path);
    const std::filesystem::path base = options.output.value_or(config.output);
    const auto reps = config.repetitions;

    std::vector<std::future<RunArtifacts>> jobs;
    for (std::int64_t k = 0; k < reps; ++k) {
      jobs.push_back(std::async(std::launch::async, [&config, &options, k]() {
        return run_experiment(config, options.seed_offset + static_cast<std::uint64_t>(k));
      }));
    }
    bool violated = false;
    for (std::int64_t k = 0; k < reps; ++k) {
      const RunArtifacts run = jobs[static_cast<std::size_t>(k)].get();
      const auto dir = reps == 1 ? base : base / ("rep_" + std::to_string(k));
      write_run(run, config.name, dir);
      print_summary(out, config.name + (reps == 1 ? "" : " rep " + std::to_string(k)), run.report);
      violated = violated || !run.report.violations.empty();
    }
    return violated ? kExitViolation : kExitOk;
  } catch (const std::exception& e) {
    err << "dynreg run: " << e.what() << '\n';
    return kExitUsage;
  }
}

struct SweepRow {
  std::int64_t horizon = 0;
  BoundReport report;
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "T,P_star,S_star,dynamic_regret,theorem1_rhs,theorem2_rhs,ratio_regret_over_P\n";
  const auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string("nan"); };
  for (const auto& row : rows) {
    const auto& r = row.report;
    const std::optional<double> ratio =
        r.P_star > 0.0 ? std::optional<double>(r.dynamic_regret / r.P_star) : std::nullopt;
    out << row.horizon << ',' << format_real(r.P_star) << ',' << format_real(r.S_star) << ','
        << format_real(r.dynamic_regret) << ',' << opt(r.theorem1_rhs) << ',' << opt(r.theorem2_rhs) << ','
        << opt(ratio) << '\n';
  }
  return out.str();
}

/// One run per horizon, concurrently.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const std::vector<std::int64_t>& horizons,
                                       std::uint64_t seed_offset = 0) {
  std::vector<std::future<SweepRow>> jobs;
  for (auto T : horizons) {
    require(T >= 1, "sweep: horizons must be positive");
    jobs.push_back(std::async(std::launch::async, [&config, T, seed_offset]() {
      ExperimentConfig c = config;
      c.scenario.horizon = T;
      return SweepRow{T, run_experiment(c, seed_offset).report};
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

inline std::vector<std::int64_t> parse_horizons(const std::string& list) {
  std::vector<std::int64_t> out;
  std::istringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::string digits;
    for (char ch : item)
      if (ch != '_' && ch != ' ') digits += ch;
    char* end = nullptr;
    const long long v = std::strtoll(digits.c_str(), &end, 10);
    if (digits.empty() || *end != '\0' || v < 1) throw UsageError("bad horizon '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--horizons needs at least one value");
  return out;
}

inline int cmd_sweep(const std::filesystem::path& config_path, const std::vector<std::int64_t>& horizons,
                     const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig config = load_config(config_path);
    const auto rows = run_sweep(config, horizons, options.seed_offset);
    const std::filesystem::path base = options.output.value_or(config.output);
    write_file_atomic(base / "sweep.csv", sweep_csv(rows));
    bool violated = false;
    for (const auto& row : rows) {
      print_summary(out, config.name + " T=" + std::to_string(row.horizon), row.report);
      violated = violated || !row.report.violations.empty();
    }
    return violated ? kExitViolation : kExitOk;
  } catch (const std::exception& e) {
    err << "dynreg sweep: " << e.what() << '\n';
    return kExitUsage;
  }
}

/// `dynreg report`: recomputes the report from trace.csv and the stored constants and
/// compares it with report.json. 0 when identical, 2 naming the first differing metric.
inline int cmd_report(const std::filesystem::path& trace_path, const std::optional<std::filesystem::path>& report_path,
                      std::ostream& out, std::ostream& err) {
  json stored;
  ExperimentTrace trace;
  ReportConstants constants;
  try {
    const auto rp = report_path.value_or(trace_path.parent_path() / "report.json");
    stored = json::parse(read_file(rp));
    constants = constants_from_json(stored.at("constants"));
    trace = parse_trace_csv(read_file(trace_path));
  } catch (const std::exception& e) {
    err << "dynreg report: " << e.what() << '\n';
    return kExitUsage;
  }

  const BoundReport recomputed = compute_report(trace, constants);
  const json metrics = metrics_to_json(recomputed);
  const json& old_metrics = stored.contains("metrics") ? stored.at("metrics") : json::object();
  for (const auto& [key, value] : metrics.items()) {
    if (!old_metrics.contains(key) || old_metrics.at(key) != value) {
      err << "dynreg report: metric '" << key << "' differs: stored "
          << (old_metrics.contains(key) ? old_metrics.at(key).dump() : std::string("<missing>")) << ", recomputed "
          << value.dump() << '\n';
      return kExitViolation;
    }
  }
  if (!stored.contains("violations") || stored.at("violations") != violations_to_json(recomputed.violations)) {
    err << "dynreg report: metric 'violations' differs\n";
    return kExitViolation;
  }
  out << "report matches: " << trace.rounds.size() << " rounds, dynamic_regret="
      << format_real(recomputed.dynamic_regret) << '\n';
  return kExitOk;
}

}  // namespace dynreg

#endif  // DYNREG_HARNESS_HPP
