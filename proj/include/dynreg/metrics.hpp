#ifndef DYNREG_METRICS_HPP
#define DYNREG_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynreg/costs.hpp"
#include "dynreg/learners.hpp"

namespace dynreg {

/// Absolute slack for regret-scale inequalities.
inline constexpr double kRegretSlack = 1e-6;
/// Absolute slack for distance-scale inequalities.
inline constexpr double kDistanceSlack = 1e-9;

struct ExperimentTrace {
  std::vector<RoundOutcome> rounds;
  /// True per-round minimizers of the scenario; falls back to the learner's targets.
  std::vector<Point> minimizers;
  std::string scenario_digest;
  std::string config_digest;

  double initial_distance() const { return rounds.empty() ? 0.0 : rounds.front().dist_before; }

  std::vector<Point> comparator_points() const {
    if (!minimizers.empty()) return minimizers;
    std::vector<Point> out;
    out.reserve(rounds.size());
    for (const auto& r : rounds) out.push_back(r.target);
    return out;
  }
};

inline double dynamic_regret(const ExperimentTrace& trace) {
  double played = 0.0;
  double best = 0.0;
  for (const auto& r : trace.rounds) {
    played += r.cost_value;
    best += r.min_value;
  }
  return played - best;
}

/// Sum of f_t(x_t) minus the fixed comparator's cumulative cost.
inline double static_regret(const ExperimentTrace& trace, double comparator_value) {
  double played = 0.0;
  for (const auto& r : trace.rounds) played += r.cost_value;
  return played - comparator_value;
}

struct StaticComparator {
  Point point;
  /// min over the set of sum_t f_t(x).
  double value = 0.0;
  /// True when the value came from an unconverged solve.
  bool estimated = false;
};

/// Best fixed action in hindsight. All-quadratic sequences use the closed form (projection
/// of the curvature-weighted mean center); anything else goes through the solver at 1e-8
/// on the averaged objective.
inline StaticComparator static_comparator(std::span<const CostFunction> costs, const FeasibleSet& set,
                                          std::int64_t max_iter = 20000) {
  require(!costs.empty(), "static_comparator: empty cost sequence");
  StaticComparator out;
  const bool all_quadratic = std::all_of(costs.begin(), costs.end(), [](const CostFunction& f) {
    return std::holds_alternative<Quadratic>(f.family());
  });
  if (all_quadratic) {
    Point weighted = Point::Zero(set.dimension());
    double total = 0.0;
    for (const auto& f : costs) {
      const auto& q = std::get<Quadratic>(f.family());
      weighted += q.curvature * q.center;
      total += q.curvature;
    }
    out.point = project(set, weighted / total);
  } else {
    struct Average {
      std::span<const CostFunction> costs;
      double value(const Point& x) const {
        double s = 0.0;
        for (const auto& f : costs) s += eval(f, x);
        return s / static_cast<double>(costs.size());
      }
      Point gradient(const Point& x) const {
        Point g = Point::Zero(x.size());
        for (const auto& f : costs) g += dynreg::gradient(f, x);
        return g / static_cast<double>(costs.size());
      }
    } average{costs};
    SolveOptions options;
    options.tol = 1e-8;
    options.max_iter = max_iter;
    bool smooth = true;
    double L = 0.0;
    for (const auto& f : costs) {
      if (auto l = f.smooth_L()) L += *l;
      else smooth = false;
    }
    if (smooth) options.smooth_L = L / static_cast<double>(costs.size());
    const SolveResult solved = minimize(average, set, set.center(), options);
    out.point = solved.x_star;
    out.estimated = !solved.converged;
  }
  for (const auto& f : costs) out.value += eval(f, out.point);
  return out;
}

inline double path_length(std::span<const Point> points) {
  double total = 0.0;
  for (std::size_t t = 1; t < points.size(); ++t) total += distance(points[t], points[t - 1]);
  return total;
}

inline double squared_path_length(std::span<const Point> points) {
  double total = 0.0;
  for (std::size_t t = 1; t < points.size(); ++t) total += squared_distance(points[t], points[t - 1]);
  return total;
}

struct VariationEstimate {
  double value = 0.0;
  /// False when at least one consecutive pair was estimated by sampling (a lower bound).
  bool exact = true;
};

inline constexpr int kVariationSamples = 10000;

/// sup over the set of |f_t - f_{t-1}| for two same-curvature quadratics. Their difference
/// is affine, a'x + b, so the sup is max(h(a) + b, h(-a) - b) with h the support function.
inline double quadratic_pair_variation(const Quadratic& now, const Quadratic& before, const FeasibleSet& set) {
  const double k = now.curvature;
  const Point a = k * (before.center - now.center);
  const double b = 0.5 * k * (now.center.squaredNorm() - before.center.squaredNorm());
  return std::max(support(set, a) + b, support(set, -a) - b);
}

/// Sum over t >= 2 of sup_x |f_t(x) - f_{t-1}(x)|. Exact for identical or same-curvature
/// quadratic pairs; other pairs take the max over `samples` shared random points of the set.
inline VariationEstimate variation_estimate(std::span<const CostFunction> costs, const FeasibleSet& set,
                                            int samples = kVariationSamples, std::uint64_t seed = 0x5eed) {
  VariationEstimate out;
  std::vector<Point> points;
  for (std::size_t t = 1; t < costs.size(); ++t) {
    const auto* now = std::get_if<Quadratic>(&costs[t].family());
    const auto* before = std::get_if<Quadratic>(&costs[t - 1].family());
    if (now && before && now->curvature == before->curvature) {
      out.value += quadratic_pair_variation(*now, *before, set);
      continue;
    }
    if (points.empty()) {
      SplitMix64 rng(seed);
      points.reserve(static_cast<std::size_t>(samples));
      for (int i = 0; i < samples; ++i) points.push_back(sample_point(set, rng));
    }
    out.exact = false;
    double sup = 0.0;
    for (const auto& x : points) sup = std::max(sup, std::abs(eval(costs[t], x) - eval(costs[t - 1], x)));
    out.value += sup;
  }
  return out;
}

/// Sum of squared cost-gradient norms at the per-round minimizers.
inline double grad_norm_sum(const ExperimentTrace& trace) {
  double total = 0.0;
  for (const auto& r : trace.rounds) total += r.grad_at_min_norm * r.grad_at_min_norm;
  return total;
}

/// K (P + d1) / (1 - rho).
inline double theorem1_rhs(double K, double rho_value, double P, double init_dist) {
  require(rho_value >= 0.0 && rho_value < 1.0, "theorem1_rhs: rho must lie in [0, 1)");
  return K * P / (1.0 - rho_value) + K * init_dist / (1.0 - rho_value);
}

struct Theorem2Bound {
  double value = 0.0;
  double path_branch = 0.0;
  double squared_branch = 0.0;
  /// Minimizer of the squared branch in alpha; 0 when the branch value is a limit.
  double alpha_star = 0.0;
};

/// min{2K P + 2K d1, G/(2a) + 2(L+a) S + (L+a) d1^2} with a at its optimum.
///
/// With B = 2S + d1^2 the second branch is G/(2a) + aB + LB, minimized at a* = sqrt(G/(2B))
/// with value sqrt(2GB) + LB. G = 0 (a -> 0+) and B = 0 (a -> inf) are the limits of the
/// same expression.
inline Theorem2Bound theorem2_rhs(double K, double L, double G, double S, double P, double init_dist) {
  require(std::isfinite(K) && std::isfinite(L) && std::isfinite(G) && std::isfinite(P),
          "theorem2_rhs: constants must be finite");
  require(S >= 0.0 && G >= 0.0, "theorem2_rhs: S and G must be nonnegative");
  Theorem2Bound out;
  out.path_branch = 2.0 * K * P + 2.0 * K * init_dist;
  const double B = 2.0 * S + init_dist * init_dist;
  out.squared_branch = std::sqrt(2.0 * G * B) + L * B;
  out.alpha_star = (G > 0.0 && B > 0.0) ? std::sqrt(G / (2.0 * B)) : 0.0;
  out.value = std::min(out.path_branch, out.squared_branch);
  return out;
}

/// Squared branch evaluated at an arbitrary alpha > 0.
inline double theorem2_squared_branch(double L, double G, double S, double init_dist, double alpha) {
  require(alpha > 0.0, "theorem2_squared_branch: alpha must be positive");
  return G / (2.0 * alpha) + 2.0 * (L + alpha) * S + (L + alpha) * init_dist * init_dist;
}

struct Violation {
  std::string check;
  std::int64_t round = 0;  // 0 for whole-run checks
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Rounds with dist_after > rho * dist_before + 1e-9, degraded rounds excluded.
inline std::vector<Violation> contraction_audit(const ExperimentTrace& trace, double rho_expected) {
  std::vector<Violation> out;
  for (const auto& r : trace.rounds) {
    if (r.degraded) continue;
    const double bound = rho_expected * r.dist_before + kDistanceSlack;
    if (r.dist_after > bound) out.push_back({"contraction", r.t, r.dist_after, bound});
  }
  return out;
}

/// Largest measured dist_after / dist_before over non-degraded rounds that moved.
inline double per_round_contraction_max(const ExperimentTrace& trace) {
  double worst = 0.0;
  for (const auto& r : trace.rounds) {
    if (r.degraded || r.dist_before <= kDistanceSlack) continue;
    worst = std::max(worst, r.dist_after / r.dist_before);
  }
  return worst;
}

/// Scenario-level inputs the report needs beyond the trace.
struct ReportConstants {
  std::string algorithm;
  double lipschitz_K = 0.0;
  std::optional<double> smooth_L;
  /// Per-round contraction factor the learner guarantees (absent for PA/baseline).
  std::optional<double> rho;
  /// True when OMGD runs at least the auto number of inner iterations.
  bool halving_guaranteed = false;
  double static_comparator_value = 0.0;
  bool static_estimated = false;
  double variation = 0.0;
  bool variation_exact = true;
  bool check_contraction = false;
  bool check_theorem1 = false;
  bool check_theorem2 = false;
};

struct BoundReport {
  double dynamic_regret = 0.0;
  double static_regret = 0.0;
  double P_star = 0.0;
  double S_star = 0.0;
  double V_f = 0.0;
  bool V_f_exact = true;
  double G_star = 0.0;
  std::optional<double> rho_used;
  std::optional<double> theorem1_rhs;
  std::optional<double> theorem2_rhs;
  std::optional<double> alpha_star;
  double per_round_contraction_max = 0.0;
  double aggregate_distance = 0.0;
  double initial_distance = 0.0;
  std::int64_t degraded_rounds = 0;
  std::vector<Violation> violations;
};

/// Every metric and every enabled inequality, computed from the trace and constants only.
inline BoundReport compute_report(const ExperimentTrace& trace, const ReportConstants& c) {
  BoundReport rep;
  const auto targets = trace.comparator_points();
  const double T = static_cast<double>(trace.rounds.size());
  const double K = c.lipschitz_K;
  rep.dynamic_regret = dynamic_regret(trace);
  rep.static_regret = static_regret(trace, c.static_comparator_value);
  rep.P_star = path_length(targets);
  rep.S_star = squared_path_length(targets);
  rep.V_f = c.variation;
  rep.V_f_exact = c.variation_exact;
  rep.G_star = grad_norm_sum(trace);
  rep.rho_used = c.rho;
  rep.initial_distance = trace.initial_distance();
  rep.per_round_contraction_max = per_round_contraction_max(trace);

  double sum_dist = 0.0;
  double sum_dist_sq = 0.0;
  double sum_after_sq = 0.0;
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const auto& r = trace.rounds[i];
    sum_dist += r.dist_before;
    sum_dist_sq += r.dist_before * r.dist_before;
    if (i + 1 < trace.rounds.size()) sum_after_sq += r.dist_after * r.dist_after;
    if (r.degraded) ++rep.degraded_rounds;
  }
  rep.aggregate_distance = sum_dist;
  const double d1 = rep.initial_distance;

  // Lipschitz reduction: regret <= K * sum of distances to the minimizer sets.
  if (rep.dynamic_regret > K * sum_dist + kRegretSlack * T)
    rep.violations.push_back({"regret_vs_aggregate_distance", 0, rep.dynamic_regret, K * sum_dist + kRegretSlack * T});

  if (c.rho) {
    rep.theorem1_rhs = theorem1_rhs(K, *c.rho, rep.P_star, d1);
    if (c.check_contraction)
      for (auto& v : contraction_audit(trace, *c.rho)) rep.violations.push_back(std::move(v));
    if (c.check_theorem1) {
      const double aggregate_bound = (rep.P_star + d1) / (1.0 - *c.rho) + kDistanceSlack * T;
      if (sum_dist > aggregate_bound)
        rep.violations.push_back({"aggregate_distance_bound", 0, sum_dist, aggregate_bound});
      if (rep.dynamic_regret > *rep.theorem1_rhs + kRegretSlack)
        rep.violations.push_back({"theorem1", 0, rep.dynamic_regret, *rep.theorem1_rhs + kRegretSlack});
    }
  }

  if (c.smooth_L) {
    const auto bound = theorem2_rhs(K, *c.smooth_L, rep.G_star, rep.S_star, rep.P_star, d1);
    rep.theorem2_rhs = bound.value;
    rep.alpha_star = bound.alpha_star;
    // The bound needs every round to at least halve the distance.
    const bool applicable = c.halving_guaranteed || (c.rho && rep.per_round_contraction_max <= 0.5 + kDistanceSlack);
    if (c.check_theorem2 && applicable) {
      if (c.halving_guaranteed) {
        for (const auto& r : trace.rounds) {
          if (r.degraded) continue;
          if (r.dist_after > 0.5 * r.dist_before + kDistanceSlack)
            rep.violations.push_back({"halving", r.t, r.dist_after, 0.5 * r.dist_before + kDistanceSlack});
        }
      }
      // Triangle split of the squared distances.
      const double split = d1 * d1 + 2.0 * sum_after_sq + 2.0 * rep.S_star + kDistanceSlack * T;
      if (sum_dist_sq > split) rep.violations.push_back({"squared_distance_split", 0, sum_dist_sq, split});
      if (rep.dynamic_regret > bound.value + kRegretSlack)
        rep.violations.push_back({"theorem2", 0, rep.dynamic_regret, bound.value + kRegretSlack});
    }
  }
  return rep;
}

}  // namespace dynreg

#endif  // DYNREG_METRICS_HPP
