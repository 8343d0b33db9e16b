#ifndef DYNREG_CONFIG_HPP
#define DYNREG_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "dynreg/learners.hpp"
#include "dynreg/scenario.hpp"
#include "dynreg/trace_io.hpp"

namespace dynreg {

using json = nlohmann::json;

/// Config problem; the message names the offending key.
class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

struct Assertions {
  bool check_contraction = false;
  bool check_theorem1 = false;
  bool check_theorem2 = false;
};

struct OracleConfig {
  bool use_solver = false;
  double tol = kDefaultSolverTolerance;
  std::int64_t max_iter = kDefaultSolverMaxIter;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ScenarioSpec scenario;
  OracleConfig oracle;
  LearnerConfig learner;
  Assertions assertions;
  std::int64_t repetitions = 1;
  std::string output = "out";
  /// Canonical JSON of the scenario and learner sections, used for digests.
  json scenario_json;
  json learner_json;
};

namespace detail {

/// Strict object reader: every key must be consumed or known.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config key '" + path_ + "': expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError("config key '" + child(key) + "': missing");
    return j_.at(key);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError("config key '" + child(key) + "': expected a number");
    return v.get<double>();
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) {
    const double v = number(key);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config key '" + child(key) + "': must be positive");
    return v;
  }

  double nonnegative_or(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("config key '" + child(key) + "': must be nonnegative");
    return v;
  }

  std::int64_t integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError("config key '" + child(key) + "': expected an integer");
    return v.get<std::int64_t>();
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError("config key '" + child(key) + "': expected a string");
    return v.get<std::string>();
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError("config key '" + child(key) + "': expected true or false");
    return v.get<bool>();
  }

  Point point(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array() || v.empty()) throw ConfigError("config key '" + child(key) + "': expected a nonempty array");
    Point p(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError("config key '" + child(key) + "': entries must be numbers");
      p[static_cast<Index>(i)] = v[i].get<double>();
    }
    if (!p.allFinite()) throw ConfigError("config key '" + child(key) + "': entries must be finite");
    return p;
  }

  Section section(const std::string& key) { return Section(at(key), child(key)); }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("config key '" + child(key) + "': unknown key");
    }
  }

  /// Marks a key as known without reading it.
  void allow(const std::string& key) { seen_.insert(key); }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto wrap(const std::string& key, F&& build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const UsageError& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

inline FeasibleSet parse_set(Section s) {
  const std::string kind = s.string("kind");
  FeasibleSet out = wrap(s.child("kind"), [&]() {
    if (kind == "ball") return FeasibleSet::ball(s.point("center"), s.positive("radius"));
    if (kind == "box") return FeasibleSet::box(s.point("lower"), s.point("upper"));
    if (kind == "simplex") return FeasibleSet::simplex(static_cast<Index>(s.integer("dimension")));
    throw ConfigError("config key '" + s.child("kind") + "': unknown set kind '" + kind + "'");
  });
  s.finish();
  return out;
}

inline Drift parse_drift(Section s) {
  const std::string kind = s.string("kind");
  Drift out;
  if (kind == "constant_step") {
    out = ConstantStep{s.nonnegative_or("delta", 0.0), s.number_or("horizon_exponent", 0.0)};
  } else if (kind == "decaying_step") {
    out = DecayingStep{s.nonnegative_or("scale", 0.0), s.number_or("exponent", 0.5)};
  } else if (kind == "random_walk") {
    out = RandomWalk{s.nonnegative_or("sigma", 0.0)};
  } else {
    throw ConfigError("config key '" + s.child("kind") + "': unknown drift kind '" + kind + "'");
  }
  s.finish();
  return out;
}

inline UniclassLoss parse_loss(Section s) {
  const std::string kind = s.string("loss");
  UniclassLoss out = UniclassLoss::squared();
  if (kind == "squared") {
  } else if (kind == "scaled_squared") {
    out = UniclassLoss::scaled_squared(s.positive("lambda"));
  } else if (kind == "epsilon_insensitive") {
    out = UniclassLoss::epsilon_insensitive(s.nonnegative_or("epsilon", 0.0));
  } else {
    throw ConfigError("config key '" + s.child("loss") + "': unknown loss '" + kind + "'");
  }
  s.finish();
  return out;
}

inline ScenarioSpec parse_scenario(Section s, OracleConfig& oracle) {
  ScenarioSpec spec;
  spec.horizon = s.integer("horizon");
  if (spec.horizon < 1) throw ConfigError("config key '" + s.child("horizon") + "': must be at least 1");
  if (s.has("seed")) {
    const json& seed = s.at("seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
      throw ConfigError("config key '" + s.child("seed") + "': expected a nonnegative integer");
    spec.seed = seed.get<std::uint64_t>();
  }
  spec.set = parse_set(s.section("set"));
  if (s.has("drift")) spec.drift = parse_drift(s.section("drift"));
  if (s.has("name")) spec.name = s.string("name");
  if (s.has("mix")) {
    const json& mix = s.at("mix");
    if (!mix.is_array() || mix.empty()) throw ConfigError("config key '" + s.child("mix") + "': expected a nonempty array");
    spec.mix.clear();
    for (const auto& m : mix) {
      const auto family = m.is_string() ? family_from_string(m.get<std::string>()) : std::nullopt;
      if (!family) throw ConfigError("config key '" + s.child("mix") + "': unknown family " + m.dump());
      spec.mix.push_back(*family);
    }
  }
  if (s.has("mix_mode")) {
    const std::string mode = s.string("mix_mode");
    if (mode == "cycle") spec.mix_mode = MixMode::cycle;
    else if (mode == "random") spec.mix_mode = MixMode::random;
    else throw ConfigError("config key '" + s.child("mix_mode") + "': expected 'cycle' or 'random'");
  }
  if (s.has("orbit_radius")) spec.orbit_radius = s.positive("orbit_radius");
  if (s.has("families")) {
    Section f = s.section("families");
    if (f.has("quadratic")) {
      Section q = f.section("quadratic");
      spec.params.curvature = q.positive("curvature");
      q.finish();
    }
    if (f.has("huber")) {
      Section h = f.section("huber");
      spec.params.huber_threshold = h.positive("threshold");
      h.finish();
    }
    if (f.has("logloss")) {
      Section l = f.section("logloss");
      if (l.has("scale")) spec.params.logloss_scale = l.positive("scale");
      if (l.has("label")) {
        const auto label = l.integer("label");
        if (label != 1 && label != -1) throw ConfigError("config key '" + l.child("label") + "': must be 1 or -1");
        spec.params.logloss_label = static_cast<int>(label);
      }
      l.finish();
    }
    f.finish();
  }
  if (s.has("oracle")) {
    Section o = s.section("oracle");
    const std::string kind = o.string("kind");
    if (kind == "solver") oracle.use_solver = true;
    else if (kind != "closed_form") throw ConfigError("config key '" + o.child("kind") + "': expected 'closed_form' or 'solver'");
    if (o.has("tol")) oracle.tol = o.positive("tol");
    if (o.has("max_iter")) {
      oracle.max_iter = o.integer("max_iter");
      if (oracle.max_iter < 1) throw ConfigError("config key '" + o.child("max_iter") + "': must be positive");
    }
    o.finish();
  }
  s.finish();
  return spec;
}

inline LearnerConfig parse_learner(Section s) {
  LearnerConfig c;
  const std::string algorithm = s.string("algorithm");
  const auto a = algorithm_from_string(algorithm);
  if (!a) throw ConfigError("config key '" + s.child("algorithm") + "': unknown algorithm '" + algorithm + "'");
  c.algorithm = *a;
  if (s.has("eta")) c.eta = s.positive("eta");
  if (s.has("inner_iterations")) {
    const json& m = s.at("inner_iterations");
    if (m.is_string() && m.get<std::string>() == "auto") {
    } else if (m.is_number_integer() && m.get<std::int64_t>() >= 1) {
      c.inner_iterations = m.get<std::int64_t>();
    } else {
      throw ConfigError("config key '" + s.child("inner_iterations") + "': expected a positive integer or \"auto\"");
    }
  }
  if (s.has("loss")) c.loss = parse_loss(s.section("loss"));
  c.epsilon = s.nonnegative_or("epsilon", 0.0);
  if (s.has("x1")) {
    const json& x1 = s.at("x1");
    if (x1.is_string() && x1.get<std::string>() == "set_center") {
    } else {
      c.x1 = s.point("x1");
    }
  }
  if (s.has("baseline_schedule")) {
    Section b = s.section("baseline_schedule");
    const std::string kind = b.string("kind");
    if (kind == "inv_sqrt") c.baseline_schedule = BaselineSchedule::inv_sqrt;
    else if (kind == "constant") c.baseline_schedule = BaselineSchedule::constant;
    else throw ConfigError("config key '" + b.child("kind") + "': expected 'inv_sqrt' or 'constant'");
    if (b.has("scale")) {
      const json& scale = b.at("scale");
      if (!(scale.is_string() && scale.get<std::string>() == "auto")) c.baseline_scale = b.positive("scale");
    }
    b.finish();
  }
  s.finish();
  return c;
}

}  // namespace detail

/// Cross-section compatibility checks that need no scenario generation.
inline void validate_config(const ExperimentConfig& c) {
  const Algorithm a = c.learner.algorithm;
  if ((c.assertions.check_contraction || c.assertions.check_theorem1) && !is_contracting(a)) {
    throw ConfigError("config key 'assertions': contraction and theorem1 checks need uniclass_ogd or uniclass_omgd, not " +
                      to_string(a));
  }
  if (c.assertions.check_theorem2) {
    if (a != Algorithm::uniclass_omgd)
      throw ConfigError("config key 'assertions.check_theorem2': needs algorithm uniclass_omgd");
    for (FamilyKind f : c.scenario.mix) {
      if (!family_is_smooth(f))
        throw ConfigError("config key 'assertions.check_theorem2': needs a smooth scenario, but mix contains " +
                          to_string(f));
    }
  }
  if (a == Algorithm::uniclass_ogd || a == Algorithm::uniclass_omgd) {
    if (!c.learner.loss.strong_modulus() || !c.learner.loss.smooth_modulus())
      throw ConfigError("config key 'learner.loss': " + to_string(a) + " needs a strongly convex and smooth loss, got " +
                        c.learner.loss.name());
    const double L = *c.learner.loss.smooth_modulus();
    if (c.learner.eta && *c.learner.eta > (1.0 / L) * (1.0 + 1e-12)) {
      throw ConfigError("config key 'learner.eta': eta = " + format_real(*c.learner.eta) +
                        " violates the contraction precondition eta <= 1/L_loss = " + format_real(1.0 / L));
    }
  }
  if (c.learner.x1 && c.learner.x1->size() != c.scenario.set.dimension())
    throw ConfigError("config key 'learner.x1': dimension does not match the set");
}

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  detail::Section top(j, "");
  if (top.has("name")) c.name = top.string("name");
  c.scenario = detail::parse_scenario(top.section("scenario"), c.oracle);
  if (!top.has("name")) c.name = c.scenario.name;
  else if (c.scenario.name == "scenario") c.scenario.name = c.name;
  c.learner = detail::parse_learner(top.section("learner"));
  if (top.has("assertions")) {
    detail::Section a = top.section("assertions");
    c.assertions.check_contraction = a.boolean_or("check_contraction", false);
    c.assertions.check_theorem1 = a.boolean_or("check_theorem1", false);
    c.assertions.check_theorem2 = a.boolean_or("check_theorem2", false);
    a.finish();
  }
  if (top.has("repetitions")) {
    c.repetitions = top.integer("repetitions");
    if (c.repetitions < 1) throw ConfigError("config key 'repetitions': must be at least 1");
  }
  if (top.has("output")) c.output = top.string("output");
  top.finish();
  c.scenario_json = j.at("scenario");
  c.learner_json = j.at("learner");
  validate_config(c);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_config(j);
}

/// FNV-1a 64 of the canonical (sorted-key) JSON dump.
inline std::string digest(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dynreg

#endif  // DYNREG_CONFIG_HPP
