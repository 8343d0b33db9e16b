#ifndef DYNREG_LEARNERS_HPP
#define DYNREG_LEARNERS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "dynreg/costs.hpp"
#include "dynreg/uniclass.hpp"

namespace dynreg {

enum class Algorithm { uniclass_ogd, uniclass_omgd, uniclass_pa, baseline_ogd };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::uniclass_ogd: return "uniclass_ogd";
    case Algorithm::uniclass_omgd: return "uniclass_omgd";
    case Algorithm::uniclass_pa: return "uniclass_pa";
    default: return "baseline_ogd";
  }
}

inline std::optional<Algorithm> algorithm_from_string(const std::string& s) {
  if (s == "uniclass_ogd") return Algorithm::uniclass_ogd;
  if (s == "uniclass_omgd") return Algorithm::uniclass_omgd;
  if (s == "uniclass_pa") return Algorithm::uniclass_pa;
  if (s == "baseline_ogd") return Algorithm::baseline_ogd;
  return std::nullopt;
}

inline bool is_contracting(Algorithm a) {
  return a == Algorithm::uniclass_ogd || a == Algorithm::uniclass_omgd;
}

/// Contraction factor sqrt(1 - lambda / (lambda + 1/eta)) of one projected gradient step
/// on a lambda-strongly convex loss.
inline double rho(double lambda, double eta) {
  require(lambda > 0.0 && std::isfinite(lambda), "rho: lambda must be positive");
  require(eta > 0.0 && std::isfinite(eta), "rho: eta must be positive");
  return std::sqrt(1.0 - lambda / (lambda + 1.0 / eta));
}

/// ceil(((lambda + 1/eta) / lambda) ln 4): enough inner steps for rho^m <= 1/2.
inline std::int64_t auto_inner_iterations(double lambda, double eta) {
  require(lambda > 0.0 && std::isfinite(lambda), "auto_inner_iterations: lambda must be positive");
  require(eta > 0.0 && std::isfinite(eta), "auto_inner_iterations: eta must be positive");
  return static_cast<std::int64_t>(std::ceil((lambda + 1.0 / eta) / lambda * std::numbers::ln2 * 2.0));
}

/// One projected gradient step on l(., target).
inline Point ogd_step(const Point& x, const Point& target, const UniclassLoss& loss, double eta,
                      const FeasibleSet& set) {
  return project(set, x - eta * loss_gradient(loss, x, target));
}

/// m projected gradient steps against the same target.
inline Point omgd_step(const Point& x, const Point& target, const UniclassLoss& loss, double eta, std::int64_t m,
                       const FeasibleSet& set) {
  require(m >= 1, "omgd_step: m must be at least 1");
  Point z = x;
  for (std::int64_t i = 0; i < m; ++i) z = ogd_step(z, target, loss, eta, set);
  return z;
}

/// Passive-aggressive uniclass update: move toward the target until within epsilon.
inline Point pa_step(const Point& x, const Point& target, double epsilon) {
  require_same_dimension(x, target, "pa_step");
  require(epsilon >= 0.0, "pa_step: epsilon must be nonnegative");
  const Point d = target - x;
  const double r = d.norm();
  if (r <= epsilon || r == 0.0) return x;
  return x + ((r - epsilon) / r) * d;
}

inline Point baseline_ogd_step(const Point& x, const Point& g, double eta_t, const FeasibleSet& set) {
  require(eta_t > 0.0, "baseline_ogd_step: eta must be positive");
  return project(set, x - eta_t * g);
}

enum class BaselineSchedule { inv_sqrt, constant };

struct LearnerConfig {
  Algorithm algorithm = Algorithm::uniclass_ogd;
  /// Learning rate; defaults to 1/L_loss for the uniclass learners.
  std::optional<double> eta;
  /// OMGD inner iterations; absent means auto.
  std::optional<std::int64_t> inner_iterations;
  UniclassLoss loss = UniclassLoss::squared();
  /// PA insensitivity.
  double epsilon = 0.0;
  /// Initial action; absent means the set's center.
  std::optional<Point> x1;
  BaselineSchedule baseline_schedule = BaselineSchedule::inv_sqrt;
  /// Baseline step scale c; absent means diameter / K_f.
  std::optional<double> baseline_scale;
};

/// Config with defaults filled in and preconditions checked.
struct ResolvedLearner {
  LearnerConfig config;
  double eta = 1.0;
  std::int64_t inner_iterations = 1;
  /// Contraction factor per round (rho for OGD, rho^m for OMGD); absent for PA and baseline.
  std::optional<double> rho_per_round;
  Point x1;
  double baseline_scale = 1.0;
};

struct ResolveOptions {
  /// Skip the eta <= 1/L_loss check. Test hook for counterexample runs only.
  bool allow_unsafe_eta = false;
};

inline ResolvedLearner resolve_learner(const LearnerConfig& config, const FeasibleSet& set, double lipschitz_K,
                                       ResolveOptions options = {}) {
  ResolvedLearner r;
  r.config = config;
  r.x1 = config.x1.value_or(set.center());
  detail::check_dimension(set, r.x1, "learner x1");
  require(contains(set, r.x1), "learner: x1 must lie in the feasible set");

  if (is_contracting(config.algorithm)) {
    const auto lambda = config.loss.strong_modulus();
    const auto L = config.loss.smooth_modulus();
    if (!lambda || !L) {
      throw UsageError("learner: " + to_string(config.algorithm) + " needs a strongly convex and smooth loss (got " +
                       config.loss.name() + ")");
    }
    r.eta = config.eta.value_or(1.0 / *L);
    require(r.eta > 0.0 && std::isfinite(r.eta), "learner: eta must be positive");
    if (!options.allow_unsafe_eta && r.eta > (1.0 / *L) * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "learner: eta = " << r.eta << " violates the contraction precondition eta <= 1/L_loss = " << 1.0 / *L;
      throw UsageError(msg.str());
    }
    const double factor = rho(*lambda, r.eta);
    if (config.algorithm == Algorithm::uniclass_omgd) {
      r.inner_iterations = config.inner_iterations.value_or(auto_inner_iterations(*lambda, r.eta));
      require(r.inner_iterations >= 1, "learner: inner_iterations must be at least 1");
      r.rho_per_round = std::pow(factor, static_cast<double>(r.inner_iterations));
    } else {
      r.rho_per_round = factor;
    }
  } else if (config.algorithm == Algorithm::uniclass_pa) {
    require(config.epsilon >= 0.0, "learner: epsilon must be nonnegative");
  } else {
    r.baseline_scale = config.baseline_scale.value_or(diameter(set) / lipschitz_K);
    require(r.baseline_scale > 0.0 && std::isfinite(r.baseline_scale), "learner: baseline scale must be positive");
  }
  return r;
}

struct RoundOutcome {
  std::int64_t t = 0;
  Point action;
  double cost_value = 0.0;
  double min_value = 0.0;
  /// Point of round t's minimizer set nearest the action.
  Point target;
  double dist_before = 0.0;
  /// Distance from the next action to round t's minimizer set.
  double dist_after = 0.0;
  double grad_at_min_norm = 0.0;
  bool degraded = false;
};

/// Minimizer-projection oracle: closed form, or the black-box solver when `use_solver`.
struct MinimizerOracle {
  bool use_solver = false;
  SolveOptions solve;

  MinimizerResult operator()(const CostFunction& f, const FeasibleSet& set, const Point& x) const {
    if (!use_solver) return minimizer_projection(f, set, x);
    return solve_minimizer(f, set, x, solve);
  }
};

/// One learner's online state. Single-threaded.
class Learner {
 public:
  Learner(ResolvedLearner resolved, FeasibleSet set, MinimizerOracle oracle = {})
      : r_(std::move(resolved)), set_(std::move(set)), oracle_(std::move(oracle)), x_(r_.x1) {}

  const Point& action() const { return x_; }
  const ResolvedLearner& resolved() const { return r_; }
  std::int64_t round() const { return t_; }

  /// Plays the current action against f, then moves to the next action.
  RoundOutcome play(const CostFunction& f) {
    RoundOutcome out;
    out.t = ++t_;
    out.action = x_;
    out.cost_value = eval(f, x_);

    const MinimizerResult found = oracle_(f, set_, x_);
    out.target = found.point;
    out.degraded = !found.converged;
    out.min_value = eval(f, out.target);
    out.dist_before = distance(x_, out.target);
    out.grad_at_min_norm = gradient(f, out.target).norm();

    Point next = step(f, out.target);
    // Same round's minimizer set, measured from the new action.
    const MinimizerResult after = oracle_(f, set_, next);
    out.dist_after = distance(next, after.point);
    out.degraded = out.degraded || !after.converged;
    x_ = std::move(next);
    return out;
  }

 private:
  Point step(const CostFunction& f, const Point& target) const {
    const LearnerConfig& c = r_.config;
    switch (c.algorithm) {
      case Algorithm::uniclass_ogd: return ogd_step(x_, target, c.loss, r_.eta, set_);
      case Algorithm::uniclass_omgd: return omgd_step(x_, target, c.loss, r_.eta, r_.inner_iterations, set_);
      case Algorithm::uniclass_pa: return pa_step(x_, target, c.epsilon);
      default: {
        const double scale = r_.baseline_scale;
        const double eta_t = c.baseline_schedule == BaselineSchedule::constant
                                 ? scale
                                 : scale / std::sqrt(static_cast<double>(t_));
        return baseline_ogd_step(x_, gradient(f, x_), eta_t, set_);
      }
    }
  }

  ResolvedLearner r_;
  FeasibleSet set_;
  MinimizerOracle oracle_;
  Point x_;
  std::int64_t t_ = 0;
};

}  // namespace dynreg

#endif  // DYNREG_LEARNERS_HPP
