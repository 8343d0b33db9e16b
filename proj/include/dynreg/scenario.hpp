#ifndef DYNREG_SCENARIO_HPP
#define DYNREG_SCENARIO_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dynreg/costs.hpp"
#include "dynreg/random.hpp"

namespace dynreg {

/// Step length delta * T^(-horizon_exponent) between consecutive centers.
struct ConstantStep {
  double delta = 0.0;
  double horizon_exponent = 0.0;
};

/// Step into round t (t >= 2) has length scale * t^(-exponent).
struct DecayingStep {
  double scale = 0.0;
  double exponent = 0.5;
};

/// Center takes a Gaussian step of scale sigma each round and is projected back onto the set.
struct RandomWalk {
  double sigma = 0.0;
};

using Drift = std::variant<ConstantStep, DecayingStep, RandomWalk>;

enum class FamilyKind { quadratic, huber, norm_distance, logloss };

inline std::string to_string(FamilyKind f) {
  switch (f) {
    case FamilyKind::quadratic: return "quadratic";
    case FamilyKind::huber: return "huber";
    case FamilyKind::norm_distance: return "norm_distance";
    default: return "logloss";
  }
}

inline std::optional<FamilyKind> family_from_string(const std::string& s) {
  if (s == "quadratic") return FamilyKind::quadratic;
  if (s == "huber") return FamilyKind::huber;
  if (s == "norm_distance") return FamilyKind::norm_distance;
  if (s == "logloss") return FamilyKind::logloss;
  return std::nullopt;
}

inline bool family_is_smooth(FamilyKind f) { return f != FamilyKind::norm_distance; }

enum class MixMode { cycle, random };

struct FamilyParams {
  double curvature = 1.0;
  double huber_threshold = 0.5;
  double logloss_scale = 1.0;
  int logloss_label = 1;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::int64_t horizon = 1;
  FeasibleSet set = FeasibleSet::ball(Point::Zero(2), 1.0);
  Drift drift = ConstantStep{};
  std::vector<FamilyKind> mix = {FamilyKind::quadratic};
  MixMode mix_mode = MixMode::cycle;
  std::uint64_t seed = 0;
  /// Radius of the circular path the centers follow; defaults to half the inradius.
  /// Larger than the set puts every center outside it (minimizers on the boundary).
  std::optional<double> orbit_radius;
  FamilyParams params;
};

struct Scenario {
  std::vector<CostFunction> costs;
  /// Unconstrained centers (for logloss the point whose direction sets the feature).
  std::vector<Point> centers;
  /// The unique constrained minimizer of each round.
  std::vector<Point> minimizers;
  std::vector<FamilyKind> families;
  /// max over rounds of the per-cost Lipschitz constants.
  double lipschitz_K = 0.0;
  /// max over rounds of the smoothness constants; absent if any round is nonsmooth.
  std::optional<double> smooth_L;
};

namespace detail {

struct OrbitPlane {
  Point u;
  Point v;
};

inline OrbitPlane orbit_plane(const FeasibleSet& set) {
  const Index n = set.dimension();
  Point u = Point::Zero(n);
  Point v = Point::Zero(n);
  if (std::holds_alternative<Simplex>(set.shape())) {
    require(n >= 3, "scenario: circular drift on a simplex needs dimension >= 3");
    u[0] = 1.0 / std::sqrt(2.0);
    u[1] = -1.0 / std::sqrt(2.0);
    v[0] = 1.0 / std::sqrt(6.0);
    v[1] = 1.0 / std::sqrt(6.0);
    v[2] = -2.0 / std::sqrt(6.0);
  } else {
    require(n >= 2, "scenario: circular drift needs dimension >= 2");
    u[0] = 1.0;
    v[1] = 1.0;
  }
  return {u, v};
}

/// Angle increment producing chord length `step` on a circle of radius r.
inline double chord_angle(double step, double r) {
  if (step == 0.0) return 0.0;
  require(step <= 2.0 * r, "scenario: drift step exceeds the orbit diameter");
  return 2.0 * std::asin(step / (2.0 * r));
}

inline std::vector<Point> drift_centers(const ScenarioSpec& spec, SplitMix64 rng) {
  const auto T = spec.horizon;
  const FeasibleSet& set = spec.set;
  const Point origin = set.center();
  const double R = spec.orbit_radius.value_or(0.5 * inradius(set));
  require(std::isfinite(R) && R > 0.0, "scenario: orbit_radius must be positive");

  std::vector<Point> centers;
  centers.reserve(static_cast<std::size_t>(T));

  if (const auto* walk = std::get_if<RandomWalk>(&spec.drift)) {
    require(walk->sigma >= 0.0, "scenario: random_walk sigma must be nonnegative");
    const OrbitPlane plane = orbit_plane(set);
    Point c = project(set, origin + R * plane.u);
    centers.push_back(c);
    for (std::int64_t t = 2; t <= T; ++t) {
      c = project(set, c + walk->sigma * rng.normal_point(set.dimension()));
      centers.push_back(c);
    }
    return centers;
  }

  const OrbitPlane plane = orbit_plane(set);
  double theta = 0.0;
  centers.push_back(origin + R * plane.u);
  for (std::int64_t t = 2; t <= T; ++t) {
    double step = 0.0;
    if (const auto* cs = std::get_if<ConstantStep>(&spec.drift)) {
      require(cs->delta >= 0.0, "scenario: constant_step delta must be nonnegative");
      step = cs->delta * std::pow(static_cast<double>(T), -cs->horizon_exponent);
    } else {
      const auto& ds = std::get<DecayingStep>(spec.drift);
      require(ds.scale >= 0.0, "scenario: decaying_step scale must be nonnegative");
      step = ds.scale * std::pow(static_cast<double>(t), -ds.exponent);
    }
    theta += chord_angle(step, R);
    centers.push_back(origin + R * (std::cos(theta) * plane.u + std::sin(theta) * plane.v));
  }
  return centers;
}

}  // namespace detail

/// Deterministic cost sequence of length T. Centers travel a circle (constant or decaying
/// chord length) or a projected random walk; each round's family follows `mix`.
inline Scenario make_scenario(const ScenarioSpec& spec) {
  require(spec.horizon >= 1, "scenario: horizon must be at least 1");
  require(!spec.mix.empty(), "scenario: mix schedule must not be empty");
  require(static_cast<std::int64_t>(spec.mix.size()) <= spec.horizon,
          "scenario: mix schedule is longer than the horizon");
  require(spec.params.curvature > 0.0, "scenario: quadratic curvature must be positive");
  require(spec.params.huber_threshold > 0.0, "scenario: huber threshold must be positive");
  require(spec.params.logloss_scale > 0.0, "scenario: logloss scale must be positive");

  const SplitMix64 root(spec.seed);
  Scenario out;
  out.centers = detail::drift_centers(spec, root.derive(1));

  SplitMix64 mix_rng = root.derive(2);
  const FeasibleSet& set = spec.set;
  const Point origin = set.center();
  bool smooth = true;
  double smooth_max = 0.0;

  out.costs.reserve(out.centers.size());
  for (std::size_t i = 0; i < out.centers.size(); ++i) {
    const FamilyKind family = spec.mix_mode == MixMode::cycle
                                  ? spec.mix[i % spec.mix.size()]
                                  : spec.mix[static_cast<std::size_t>(mix_rng.next_u64() % spec.mix.size())];
    const Point& c = out.centers[i];
    CostFunction f = [&]() {
      switch (family) {
        case FamilyKind::quadratic: return CostFunction::quadratic(c, spec.params.curvature, set);
        case FamilyKind::huber: return CostFunction::huber(c, spec.params.huber_threshold, set);
        case FamilyKind::norm_distance: return CostFunction::norm_distance(c, set);
        default: {
          Point direction = c - origin;
          const double norm = direction.norm();
          require(norm > 0.0, "scenario: logloss center coincides with the set center");
          return CostFunction::logloss(spec.params.logloss_scale / norm * direction, spec.params.logloss_label,
                                       set);
        }
      }
    }();
    if (!has_unique_minimizer(f, set)) {
      std::ostringstream msg;
      msg << "scenario: round " << i + 1 << " has a non-singleton minimizer set";
      throw UsageError(msg.str());
    }
    out.minimizers.push_back(minimizer_projection(f, set, origin).point);
    out.lipschitz_K = std::max(out.lipschitz_K, f.lipschitz_K());
    if (auto L = f.smooth_L()) smooth_max = std::max(smooth_max, *L);
    else smooth = false;
    out.families.push_back(family);
    out.costs.push_back(std::move(f));
  }
  if (smooth) out.smooth_L = smooth_max;
  return out;
}

}  // namespace dynreg

#endif  // DYNREG_SCENARIO_HPP
