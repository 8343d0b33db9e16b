#ifndef DYNREG_SELFTEST_HPP
#define DYNREG_SELFTEST_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "dynreg/costs.hpp"
#include "dynreg/harness.hpp"
#include "dynreg/learners.hpp"
#include "dynreg/metrics.hpp"
#include "dynreg/solver.hpp"
#include "dynreg/uniclass.hpp"

namespace dynreg {

/// Outcome of one sampled property. `worst_slack` is the smallest margin observed; the
/// property holds when it is >= 0 (the tolerance is already folded in).
struct PropertyResult {
  PropertyResult() = default;
  explicit PropertyResult(std::string property) : name(std::move(property)) {}

  std::string name;
  double worst_slack = std::numeric_limits<double>::infinity();
  bool passed = true;
  /// Counterexample properties pass when the underlying inequality is violated.
  bool expected_failure = false;
  std::string detail;
};

namespace selftest {

inline std::vector<FeasibleSet> reference_sets() {
  return {FeasibleSet::ball(make_point({0.5, -0.25, 0.0}), 1.5),
          FeasibleSet::box(make_point({-1.0, 0.0, -2.0}), make_point({1.0, 0.5, 1.0})),
          FeasibleSet::simplex(4)};
}

/// y drawn well outside and inside the set.
inline Point wide_point(const FeasibleSet& set, SplitMix64& rng) {
  return set.center() + 2.0 * rng.normal_point(set.dimension());
}

/// One cost of every family over `set`, with random parameters; half the centers lie
/// outside the set.
inline std::vector<CostFunction> random_costs(const FeasibleSet& set, SplitMix64& rng) {
  const Point inside = sample_point(set, rng);
  const Point anywhere = wide_point(set, rng);
  Point feature = rng.normal_point(set.dimension());
  if (feature.norm() == 0.0) feature[0] = 1.0;
  return {CostFunction::quadratic(inside, rng.uniform(0.5, 3.0), set),
          CostFunction::quadratic(anywhere, rng.uniform(0.5, 3.0), set),
          CostFunction::huber(anywhere, rng.uniform(0.2, 1.0), set),
          CostFunction::norm_distance(anywhere, set),
          CostFunction::logloss(rng.uniform(0.5, 2.0) * feature, rng.uniform() < 0.5 ? 1 : -1, set)};
}

inline void track(PropertyResult& r, double slack) {
  if (!(slack >= r.worst_slack)) r.worst_slack = slack;  // NaN sticks
}

inline PropertyResult finish(PropertyResult r) {
  r.passed = r.worst_slack >= 0.0;
  return r;
}

/// Central finite-difference gradient with step h.
template <class F>
Point finite_difference(const F& f, const Point& x, double h = 1e-6) {
  Point g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Point up = x, down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

/// ||g - g_fd|| / max(1, ||g||)
inline double relative_gradient_error(const Point& analytic, const Point& numeric) {
  return (analytic - numeric).norm() / std::max(1.0, analytic.norm());
}

/// True when x sits within `margin` of a kink of f, where central differences straddle it.
inline bool near_kink(const CostFunction& f, const Point& x, double margin = 1e-3) {
  if (const auto* h = std::get_if<Huber>(&f.family())) return std::abs(distance(x, h->center) - h->threshold) < margin;
  if (const auto* n = std::get_if<NormDistance>(&f.family())) return distance(x, n->center) < margin;
  return false;
}

}  // namespace selftest

inline PropertyResult property_projection_idempotence(int samples, std::uint64_t seed = 11) {
  PropertyResult r{"projection_idempotence"};
  SplitMix64 rng(seed);
  for (const auto& set : selftest::reference_sets())
    for (int i = 0; i < samples; ++i) {
      const Point p = project(set, selftest::wide_point(set, rng));
      selftest::track(r, 1e-12 - distance(project(set, p), p));
    }
  return selftest::finish(r);
}

inline PropertyResult property_projection_nonexpansive(int samples, std::uint64_t seed = 12) {
  PropertyResult r{"projection_nonexpansive"};
  SplitMix64 rng(seed);
  for (const auto& set : selftest::reference_sets())
    for (int i = 0; i < samples; ++i) {
      const Point y1 = selftest::wide_point(set, rng);
      const Point y2 = selftest::wide_point(set, rng);
      selftest::track(r, distance(y1, y2) - distance(project(set, y1), project(set, y2)) + 1e-12);
    }
  return selftest::finish(r);
}

inline PropertyResult property_projection_variational_inequality(int samples, std::uint64_t seed = 13) {
  PropertyResult r{"projection_variational_inequality"};
  SplitMix64 rng(seed);
  for (const auto& set : selftest::reference_sets())
    for (int i = 0; i < samples; ++i) {
      const Point y = selftest::wide_point(set, rng);
      const Point p = project(set, y);
      const Point x = sample_point(set, rng);
      selftest::track(r, 1e-10 - (y - p).dot(x - p));
    }
  return selftest::finish(r);
}

inline PropertyResult property_projection_membership(int samples, std::uint64_t seed = 14) {
  PropertyResult r{"projection_membership"};
  SplitMix64 rng(seed);
  for (const auto& set : selftest::reference_sets())
    for (int i = 0; i < samples; ++i) {
      const Point p = project(set, selftest::wide_point(set, rng));
      selftest::track(r, contains(set, p, 1e-10) ? 1e-10 - distance_to_set(set, p) : -1.0);
    }
  return selftest::finish(r);
}

/// Analytic cost gradients against central differences (step 1e-6), tolerance 1e-6.
inline PropertyResult property_cost_gradients(int points_per_family, std::uint64_t seed = 15) {
  PropertyResult r{"cost_gradient_finite_difference"};
  SplitMix64 rng(seed);
  const auto set = FeasibleSet::ball(Point::Zero(3), 2.0);
  int checked[4] = {0, 0, 0, 0};
  while (*std::min_element(std::begin(checked), std::end(checked)) < points_per_family) {
    for (const auto& f : selftest::random_costs(set, rng)) {
      const Point x = sample_point(set, rng);
      if (selftest::near_kink(f, x)) continue;
      const Point fd = selftest::finite_difference([&f](const Point& p) { return eval(f, p); }, x);
      selftest::track(r, 1e-6 - selftest::relative_gradient_error(gradient(f, x), fd));
      ++checked[f.family().index()];
    }
  }
  return selftest::finish(r);
}

inline PropertyResult property_lipschitz(int samples, std::uint64_t seed = 16) {
  PropertyResult r{"lipschitz_sampling"};
  SplitMix64 rng(seed);
  for (const auto& set : selftest::reference_sets())
    for (int i = 0; i < samples; ++i)
      for (const auto& f : selftest::random_costs(set, rng)) {
        const Point x = sample_point(set, rng), y = sample_point(set, rng);
        selftest::track(r, f.lipschitz_K() * distance(x, y) - std::abs(eval(f, x) - eval(f, y)) + 1e-12);
      }
  return selftest::finish(r);
}

/// f(x) - min f <= K ||x - P_{F*}(x)|| pointwise.
inline PropertyResult property_minimizer_gap(int samples, std::uint64_t seed = 17) {
  PropertyResult r{"minimizer_gap_lipschitz"};
  SplitMix64 rng(seed);
  for (const auto& set : selftest::reference_sets())
    for (int i = 0; i < samples; ++i)
      for (const auto& f : selftest::random_costs(set, rng)) {
        const Point x = sample_point(set, rng);
        const Point star = minimizer_projection(f, set, x).point;
        selftest::track(r, f.lipschitz_K() * distance(x, star) - (eval(f, x) - eval(f, star)) + 1e-12);
      }
  return selftest::finish(r);
}

inline PropertyResult property_minimizer_optimality(int samples, std::uint64_t seed = 18) {
  PropertyResult r{"minimizer_optimality"};
  SplitMix64 rng(seed);
  for (const auto& set : selftest::reference_sets())
    for (int i = 0; i < samples; ++i)
      for (const auto& f : selftest::random_costs(set, rng)) {
        const Point star = minimizer_projection(f, set, sample_point(set, rng)).point;
        const Point z = sample_point(set, rng);
        selftest::track(r, std::min(eval(f, z) + 1e-8 - eval(f, star), 1e-9 - distance_to_set(set, star)));
      }
  return selftest::finish(r);
}

inline PropertyResult property_smoothness(int samples, std::uint64_t seed = 19) {
  PropertyResult r{"smoothness_sampling"};
  SplitMix64 rng(seed);
  for (const auto& set : selftest::reference_sets())
    for (int i = 0; i < samples; ++i)
      for (const auto& f : selftest::random_costs(set, rng)) {
        const auto L = f.smooth_L();
        if (!L) continue;
        const Point x = sample_point(set, rng), y = sample_point(set, rng);
        const double upper = eval(f, x) + gradient(f, x).dot(y - x) + 0.5 * *L * squared_distance(x, y);
        selftest::track(r, upper - eval(f, y) + 1e-10);
      }
  return selftest::finish(r);
}

inline PropertyResult property_strong_convexity(int samples, std::uint64_t seed = 20) {
  PropertyResult r{"strong_convexity_sampling"};
  SplitMix64 rng(seed);
  for (const auto& set : selftest::reference_sets())
    for (int i = 0; i < samples; ++i)
      for (const auto& f : selftest::random_costs(set, rng)) {
        if (f.class_tag().kind != ConvexityClass::strongly_convex) continue;
        const Point x = sample_point(set, rng), y = sample_point(set, rng);
        const double lower =
            eval(f, x) + gradient(f, x).dot(y - x) + 0.5 * f.class_tag().modulus * squared_distance(x, y);
        selftest::track(r, eval(f, y) - lower + 1e-10);
      }
  return selftest::finish(r);
}

/// f(x) - f(x*) >= (lambda/2) ||x - x*||^2 at the constrained minimizer x*, slack >= -1e-10.
inline PropertyResult property_strong_convexity_gap(int samples, std::uint64_t seed = 21) {
  PropertyResult r{"strong_convexity_gap"};
  SplitMix64 rng(seed);
  const auto sets = selftest::reference_sets();
  for (int i = 0; i < samples; ++i) {
    const auto& set = sets[static_cast<std::size_t>(i) % sets.size()];
    const double kappa = rng.uniform(0.5, 3.0);
    const auto f = CostFunction::quadratic(selftest::wide_point(set, rng), kappa, set);
    const Point star = minimizer_projection(f, set, set.center()).point;
    const Point x = sample_point(set, rng);
    selftest::track(r, eval(f, x) - eval(f, star) - 0.5 * kappa * squared_distance(x, star) + 1e-10);
  }
  return selftest::finish(r);
}

inline PropertyResult property_loss_gradients(int points, std::uint64_t seed = 22) {
  PropertyResult r{"loss_gradient_finite_difference"};
  SplitMix64 rng(seed);
  const std::vector<UniclassLoss> losses = {UniclassLoss::squared(), UniclassLoss::scaled_squared(2.5),
                                            UniclassLoss::epsilon_insensitive(0.3)};
  for (const auto& loss : losses)
    for (int i = 0; i < points;) {
      const Point target = rng.normal_point(3);
      const Point x = target + rng.normal_point(3);
      if (std::holds_alternative<EpsilonInsensitiveLoss>(loss.kind()) && std::abs(distance(x, target) - 0.3) < 1e-3)
        continue;
      const Point fd = selftest::finite_difference([&](const Point& p) { return loss_eval(loss, p, target); }, x);
      selftest::track(r, 1e-6 - selftest::relative_gradient_error(loss_gradient(loss, x, target), fd));
      ++i;
    }
  return selftest::finish(r);
}

inline PropertyResult property_loss_validation(int samples, std::uint64_t seed = 23) {
  PropertyResult r{"loss_validation_accepts_squared"};
  for (const auto& set : selftest::reference_sets()) {
    for (const auto& loss : {UniclassLoss::squared(), UniclassLoss::scaled_squared(2.0)}) {
      const auto report = validate_loss(loss, set, samples, seed);
      selftest::track(r, std::min({report.strong_convexity_slack + 1e-9, report.smoothness_slack + 1e-9,
                                   1e-8 - report.argmin_distance}));
    }
  }
  return selftest::finish(r);
}

/// Over-declared and flat losses must be rejected.
inline PropertyResult property_loss_validation_rejects(int samples, std::uint64_t seed = 24) {
  PropertyResult r{"loss_validation_rejects_invalid"};
  const auto set = FeasibleSet::ball(Point::Zero(3), 1.0);
  const auto overdeclared = UniclassLoss::scaled_squared(2.0).with_declared_moduli(3.0, 2.0);
  const auto flat = UniclassLoss::epsilon_insensitive(0.1).with_declared_moduli(0.5, 1.0);
  const auto a = validate_loss(overdeclared, set, samples, seed);
  const auto b = validate_loss(flat, set, samples, seed);
  selftest::track(r, -a.strong_convexity_slack);
  selftest::track(r, -b.strong_convexity_slack);
  r = selftest::finish(r);
  r.passed = r.passed && !a.passed && !b.passed;
  return r;
}

/// Projected gradient step == closed-form prox == solved model problem (within 1e-8).
inline PropertyResult property_proximal_equivalence(int samples, std::uint64_t seed = 25) {
  PropertyResult r{"proximal_step_equivalence"};
  SplitMix64 rng(seed);
  const auto set = FeasibleSet::ball(make_point({0.2, -0.1, 0.3}), 1.0);
  const auto loss = UniclassLoss::squared();
  for (int i = 0; i < samples; ++i) {
    const Point x = sample_point(set, rng);
    const Point target = sample_point(set, rng);
    const double eta = rng.uniform(0.05, 1.0);
    const Point g = loss_gradient(loss, x, target) + rng.normal_point(3);
    const Point closed = proximal_step(g, x, eta, set);
    const Point stepped = project(set, x - eta * g);
    SolveOptions options;
    options.tol = 1e-12;
    options.smooth_L = 1.0 / eta;
    const SolveResult solved = minimize(ProximalModel{g, x, eta}, set, x, options);
    selftest::track(r, 1e-8 - std::max(distance(closed, solved.x_star), distance(closed, stepped)));
  }
  return selftest::finish(r);
}

/// One OGD step contracts the distance to the target by rho(lambda, eta).
inline PropertyResult property_ogd_contraction(int samples, std::uint64_t seed = 26) {
  PropertyResult r{"ogd_contraction"};
  SplitMix64 rng(seed);
  const auto sets = selftest::reference_sets();
  for (int i = 0; i < samples; ++i) {
    const auto& set = sets[static_cast<std::size_t>(i) % sets.size()];
    const double lambda = rng.uniform(0.2, 4.0);
    const auto loss = UniclassLoss::scaled_squared(lambda);
    const double eta = rng.uniform(0.01, 1.0) / lambda;
    const Point x = sample_point(set, rng);
    const Point target = sample_point(set, rng);
    const Point next = ogd_step(x, target, loss, eta, set);
    selftest::track(r, rho(lambda, eta) * distance(x, target) + 1e-9 - distance(next, target));
  }
  return selftest::finish(r);
}

inline PropertyResult property_omgd_halving(int samples, std::uint64_t seed = 27) {
  PropertyResult r{"omgd_halving"};
  SplitMix64 rng(seed);
  const auto sets = selftest::reference_sets();
  for (int i = 0; i < samples; ++i) {
    const auto& set = sets[static_cast<std::size_t>(i) % sets.size()];
    const double lambda = rng.uniform(0.2, 4.0);
    const auto loss = UniclassLoss::scaled_squared(lambda);
    const double eta = rng.uniform(0.01, 1.0) / lambda;
    const auto m = auto_inner_iterations(lambda, eta);
    const Point x = sample_point(set, rng);
    const Point target = sample_point(set, rng);
    const Point next = omgd_step(x, target, loss, eta, m, set);
    const double before = distance(x, target);
    selftest::track(r, std::min(0.5 * before, std::pow(rho(lambda, eta), static_cast<double>(m)) * before) + 1e-9 -
                           distance(next, target));
  }
  return selftest::finish(r);
}

/// PA equals an OGD step on the epsilon-insensitive loss with rate l_eps(target, x).
inline PropertyResult property_pa_is_ogd(int samples, std::uint64_t seed = 28) {
  PropertyResult r{"pa_matches_ogd"};
  SplitMix64 rng(seed);
  const auto set = FeasibleSet::ball(Point::Zero(3), 10.0);
  for (int i = 0; i < samples; ++i) {
    const double eps = rng.uniform(0.0, 0.5);
    const auto loss = UniclassLoss::epsilon_insensitive(eps);
    const Point x = sample_point(set, rng);
    const Point target = sample_point(set, rng);
    const double rate = loss_eval(loss, x, target);
    if (rate <= 0.0) continue;
    const Point pa = pa_step(x, target, eps);
    const Point ogd = ogd_step(x, target, loss, rate, set);
    selftest::track(r, 1e-12 - distance(pa, ogd));
  }
  return selftest::finish(r);
}

inline PropertyResult property_solver_descent(int problems, std::uint64_t seed = 29) {
  PropertyResult r{"solver_monotone_descent"};
  SplitMix64 rng(seed);
  for (const auto& set : selftest::reference_sets())
    for (int i = 0; i < problems; ++i)
      for (const auto& f : selftest::random_costs(set, rng)) {
        if (!f.smooth_L()) continue;
        double previous = std::numeric_limits<double>::infinity();
        SolveOptions options;
        options.tol = 1e-10;
        options.max_iter = 2000;
        options.smooth_L = f.smooth_L();
        options.observer = [&](std::int64_t, const Point&, double value) {
          selftest::track(r, previous - value + 1e-12);
          previous = value;
        };
        const SolveResult solved = minimize(f, set, sample_point(set, rng), options);
        selftest::track(r, 1e-9 - distance_to_set(set, solved.x_star));
      }
  if (r.worst_slack == std::numeric_limits<double>::infinity()) r.worst_slack = 0.0;
  return selftest::finish(r);
}

/// Config used by the counterexample: squared loss with eta = 2.5 > 1/L_loss.
inline ExperimentConfig mistuned_config() {
  ExperimentConfig c;
  c.name = "mistuned";
  c.scenario.horizon = 50;
  c.scenario.set = FeasibleSet::ball(Point::Zero(2), 10.0);
  c.scenario.drift = ConstantStep{0.1, 0.0};
  c.scenario.orbit_radius = 1.0;
  c.learner.algorithm = Algorithm::uniclass_ogd;
  c.learner.eta = 2.5;
  c.assertions.check_contraction = true;
  c.scenario_json = json::object();
  c.learner_json = json::object();
  return c;
}

/// Expected failure: with eta above 1/L_loss the contraction audit must flag rounds.
inline PropertyResult property_contraction_counterexample() {
  PropertyResult r{"contraction_counterexample"};
  r.expected_failure = true;
  ResolveOptions unsafe;
  unsafe.allow_unsafe_eta = true;
  const auto run = run_experiment(mistuned_config(), 0, unsafe);
  const auto violations = contraction_audit(run.trace, *run.constants.rho);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& v : violations) worst = std::min(worst, v.rhs - v.lhs);
  r.worst_slack = violations.empty() ? 0.0 : worst;
  r.passed = !violations.empty();
  r.detail = std::to_string(violations.size()) + " rounds flagged";
  return r;
}

struct SelftestOptions {
  int samples = 1000;
  int gradient_points = 100;
};

inline std::vector<PropertyResult> run_selftest(const SelftestOptions& o = {}) {
  return {property_projection_idempotence(o.samples),
          property_projection_nonexpansive(o.samples),
          property_projection_variational_inequality(o.samples),
          property_projection_membership(o.samples),
          property_cost_gradients(o.gradient_points),
          property_lipschitz(o.samples),
          property_minimizer_gap(o.samples),
          property_minimizer_optimality(o.samples),
          property_smoothness(o.samples),
          property_strong_convexity(o.samples),
          property_strong_convexity_gap(o.samples),
          property_loss_gradients(o.gradient_points),
          property_loss_validation(o.samples),
          property_loss_validation_rejects(o.samples),
          property_proximal_equivalence(o.samples),
          property_ogd_contraction(o.samples),
          property_omgd_halving(o.samples),
          property_pa_is_ogd(o.samples),
          property_solver_descent(20),
          property_contraction_counterexample()};
}

inline int cmd_selftest(std::ostream& out, const SelftestOptions& options = {}) {
  const auto results = run_selftest(options);
  bool ok = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << "  worst_slack=" << format_real(r.worst_slack);
    if (r.expected_failure) out << "  (expected violation" << (r.passed ? " observed" : " NOT observed") << ")";
    if (!r.detail.empty()) out << "  " << r.detail;
    out << '\n';
    ok = ok && r.passed;
  }
  out << results.size() << " properties, " << (ok ? "all passed" : "FAILURES") << '\n';
  return ok ? kExitOk : kExitViolation;
}

}  // namespace dynreg

#endif  // DYNREG_SELFTEST_HPP
