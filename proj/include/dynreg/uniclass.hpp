#ifndef DYNREG_UNICLASS_HPP
#define DYNREG_UNICLASS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dynreg/geometry.hpp"
#include "dynreg/random.hpp"
#include "dynreg/solver.hpp"

namespace dynreg {

/// 1/2 ||x - target||^2
struct SquaredLoss {};

/// (lambda / 2) ||x - target||^2
struct ScaledSquaredLoss {
  double lambda = 1.0;
};

/// max(0, ||x - target|| - epsilon)
struct EpsilonInsensitiveLoss {
  double epsilon = 0.0;
};

/// A user-chosen loss l(x, target). It holds no round state: the per-round target is
/// always passed in. The declared moduli are what the learners derive rho and m from.
class UniclassLoss {
 public:
  using Kind = std::variant<SquaredLoss, ScaledSquaredLoss, EpsilonInsensitiveLoss>;

  static UniclassLoss squared() { return UniclassLoss(SquaredLoss{}, 1.0, 1.0); }

  static UniclassLoss scaled_squared(double lambda) {
    require(std::isfinite(lambda) && lambda > 0.0, "scaled_squared: lambda must be positive");
    return UniclassLoss(ScaledSquaredLoss{lambda}, lambda, lambda);
  }

  static UniclassLoss epsilon_insensitive(double epsilon) {
    require(std::isfinite(epsilon) && epsilon >= 0.0, "epsilon_insensitive: epsilon must be nonnegative");
    return UniclassLoss(EpsilonInsensitiveLoss{epsilon}, std::nullopt, std::nullopt);
  }

  /// Same loss with caller-declared moduli; used to audit mis-declared losses.
  UniclassLoss with_declared_moduli(std::optional<double> strong, std::optional<double> smooth) const {
    return UniclassLoss(kind_, strong, smooth);
  }

  const Kind& kind() const { return kind_; }
  std::optional<double> strong_modulus() const { return strong_; }
  std::optional<double> smooth_modulus() const { return smooth_; }

  std::string name() const {
    switch (kind_.index()) {
      case 0: return "squared";
      case 1: return "scaled_squared";
      default: return "epsilon_insensitive";
    }
  }

 private:
  UniclassLoss(Kind kind, std::optional<double> strong, std::optional<double> smooth)
      : kind_(kind), strong_(strong), smooth_(smooth) {}

  Kind kind_;
  std::optional<double> strong_;
  std::optional<double> smooth_;
};

inline double loss_eval(const UniclassLoss& loss, const Point& x, const Point& target) {
  require_same_dimension(x, target, "loss_eval");
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SquaredLoss>) {
          return 0.5 * squared_distance(x, target);
        } else if constexpr (std::is_same_v<K, ScaledSquaredLoss>) {
          return 0.5 * k.lambda * squared_distance(x, target);
        } else {
          const double r = distance(x, target);
          return r <= k.epsilon ? 0.0 : r - k.epsilon;
        }
      },
      loss.kind());
}

/// Gradient in x. The epsilon-insensitive loss is flat on the epsilon-ball (kink included).
inline Point loss_gradient(const UniclassLoss& loss, const Point& x, const Point& target) {
  require_same_dimension(x, target, "loss_gradient");
  return std::visit(
      [&](const auto& k) -> Point {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SquaredLoss>) {
          return x - target;
        } else if constexpr (std::is_same_v<K, ScaledSquaredLoss>) {
          return k.lambda * (x - target);
        } else {
          const Point d = x - target;
          const double r = d.norm();
          if (r <= k.epsilon || r == 0.0) return Point::Zero(x.size());
          return d / r;
        }
      },
      loss.kind());
}

struct ValidationReport {
  /// min over sampled pairs of l(y) - l(x) - g(x)'(y - x) - (lambda/2)||y - x||^2
  double strong_convexity_slack = 0.0;
  /// min over sampled pairs of l(x) + g(x)'(y - x) + (L/2)||y - x||^2 - l(y)
  double smoothness_slack = 0.0;
  /// max over sampled targets of ||argmin_{set} l(., target) - target||
  double argmin_distance = 0.0;
  bool passed = false;
  std::vector<std::string> failures;
};

/// Certifies the contraction hypotheses for a loss: declared strong convexity, declared
/// smoothness, and argmin over the set equal to the target. Targets are sampled in the set.
inline ValidationReport validate_loss(const UniclassLoss& loss, const FeasibleSet& set, int samples,
                                      std::uint64_t seed) {
  require(samples > 0, "validate_loss: samples must be positive");
  constexpr double kSlackTolerance = -1e-9;
  constexpr double kArgminTolerance = 1e-8;

  ValidationReport report;
  report.strong_convexity_slack = std::numeric_limits<double>::infinity();
  report.smoothness_slack = std::numeric_limits<double>::infinity();

  SplitMix64 rng(seed);
  const auto lambda = loss.strong_modulus();
  const auto L = loss.smooth_modulus();
  for (int i = 0; i < samples; ++i) {
    const Point target = sample_point(set, rng);
    const Point x = sample_point(set, rng);
    const Point y = sample_point(set, rng);
    const double lx = loss_eval(loss, x, target);
    const double ly = loss_eval(loss, y, target);
    const double linear = lx + loss_gradient(loss, x, target).dot(y - x);
    const double gap = squared_distance(x, y);
    if (lambda) report.strong_convexity_slack = std::min(report.strong_convexity_slack, ly - linear - 0.5 * *lambda * gap);
    if (L) report.smoothness_slack = std::min(report.smoothness_slack, linear + 0.5 * *L * gap - ly);
  }

  // Argmin check on a handful of targets: the solver starts from a random point.
  const int argmin_trials = std::min(samples, 16);
  for (int i = 0; i < argmin_trials; ++i) {
    const Point target = sample_point(set, rng);
    const Point start = sample_point(set, rng);
    struct Curried {
      const UniclassLoss* loss;
      const Point* target;
      double value(const Point& x) const { return loss_eval(*loss, x, *target); }
      Point gradient(const Point& x) const { return loss_gradient(*loss, x, *target); }
    } objective{&loss, &target};
    SolveOptions options;
    options.tol = 1e-12;
    options.max_iter = 10000;
    if (L && lambda) options.smooth_L = *L;
    const SolveResult solved = minimize(objective, set, start, options);
    report.argmin_distance = std::max(report.argmin_distance, distance(solved.x_star, target));
  }

  if (!lambda) report.failures.push_back("strong convexity modulus not declared");
  else if (report.strong_convexity_slack < kSlackTolerance)
    report.failures.push_back("strong convexity inequality violated (slack " +
                              std::to_string(report.strong_convexity_slack) + ")");
  if (!L) report.failures.push_back("smoothness modulus not declared");
  else if (report.smoothness_slack < kSlackTolerance)
    report.failures.push_back("smoothness inequality violated (slack " + std::to_string(report.smoothness_slack) + ")");
  if (report.argmin_distance > kArgminTolerance)
    report.failures.push_back("argmin over the set differs from the target by " +
                              std::to_string(report.argmin_distance));
  if (!lambda) report.strong_convexity_slack = 0.0;
  if (!L) report.smoothness_slack = 0.0;
  report.passed = report.failures.empty();
  return report;
}

}  // namespace dynreg

#endif  // DYNREG_UNICLASS_HPP
