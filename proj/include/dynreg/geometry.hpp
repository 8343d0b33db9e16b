#ifndef DYNREG_GEOMETRY_HPP
#define DYNREG_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "dynreg/point.hpp"
#include "dynreg/random.hpp"

namespace dynreg {

inline constexpr double kMembershipTolerance = 1e-9;

struct Box {
  Point lower;
  Point upper;
};

struct Ball {
  Point center;
  double radius = 1.0;
};

/// Probability simplex {x >= 0, sum x = 1} in R^dimension.
struct Simplex {
  Index dimension = 2;
};

/// Closed convex set with a closed-form Euclidean projection.
class FeasibleSet {
 public:
  using Shape = std::variant<Box, Ball, Simplex>;

  static FeasibleSet box(Point lower, Point upper) {
    require(lower.size() > 0, "box: dimension must be positive");
    require_same_dimension(lower, upper, "box");
    require(all_finite(lower) && all_finite(upper), "box: bounds must be finite");
    require((lower.array() <= upper.array()).all(), "box: lower must not exceed upper");
    return FeasibleSet(Box{std::move(lower), std::move(upper)});
  }

  static FeasibleSet ball(Point center, double radius) {
    require(center.size() > 0, "ball: dimension must be positive");
    require(all_finite(center), "ball: center must be finite");
    require(std::isfinite(radius) && radius > 0.0, "ball: radius must be positive");
    return FeasibleSet(Ball{std::move(center), radius});
  }

  static FeasibleSet simplex(Index dimension) {
    require(dimension >= 2, "simplex: dimension must be at least 2");
    return FeasibleSet(Simplex{dimension});
  }

  const Shape& shape() const { return shape_; }

  Index dimension() const {
    return std::visit(
        [](const auto& s) -> Index {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Box>) return s.lower.size();
          else if constexpr (std::is_same_v<S, Ball>) return s.center.size();
          else return s.dimension;
        },
        shape_);
  }

  std::string kind() const {
    switch (shape_.index()) {
      case 0: return "box";
      case 1: return "ball";
      default: return "simplex";
    }
  }

  /// Box midpoint, ball center, or simplex barycenter.
  Point center() const {
    return std::visit(
        [](const auto& s) -> Point {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Box>) return 0.5 * (s.lower + s.upper);
          else if constexpr (std::is_same_v<S, Ball>) return s.center;
          else return Point::Constant(s.dimension, 1.0 / static_cast<double>(s.dimension));
        },
        shape_);
  }

 private:
  explicit FeasibleSet(Shape shape) : shape_(std::move(shape)) {}
  Shape shape_;
};

namespace detail {

/// Sort-and-threshold projection onto {x >= 0, sum x = 1}.
inline Point project_unit_simplex(const Point& y) {
  const Index n = y.size();
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumulative += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) threshold = candidate;
  }
  return (y.array() - threshold).max(0.0).matrix();
}

inline void check_dimension(const FeasibleSet& set, const Point& y, const char* where) {
  if (y.size() != set.dimension()) {
    throw UsageError(std::string(where) + ": point has dimension " + std::to_string(y.size()) +
                     " but set has dimension " + std::to_string(set.dimension()));
  }
}

}  // namespace detail

/// Euclidean projection onto the set.
inline Point project(const FeasibleSet& set, const Point& y) {
  detail::check_dimension(set, y, "project");
  return std::visit(
      [&y](const auto& s) -> Point {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Box>) {
          return y.cwiseMax(s.lower).cwiseMin(s.upper);
        } else if constexpr (std::is_same_v<S, Ball>) {
          const Point offset = y - s.center;
          const double norm = offset.norm();
          if (norm <= s.radius) return y;
          return s.center + (s.radius / norm) * offset;
        } else {
          return detail::project_unit_simplex(y);
        }
      },
      set.shape());
}

inline bool contains(const FeasibleSet& set, const Point& x, double tol = kMembershipTolerance) {
  require(tol >= 0.0, "contains: tolerance must be nonnegative");
  return distance(x, project(set, x)) <= tol;
}

inline double distance_to_set(const FeasibleSet& set, const Point& y) {
  return distance(y, project(set, y));
}

inline double diameter(const FeasibleSet& set) {
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Box>) return (s.upper - s.lower).norm();
        else if constexpr (std::is_same_v<S, Ball>) return 2.0 * s.radius;
        else return std::sqrt(2.0);
      },
      set.shape());
}

/// Radius of the largest ball around center() that fits in the set (relative interior
/// for the simplex).
inline double inradius(const FeasibleSet& set) {
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Box>) return 0.5 * (s.upper - s.lower).minCoeff();
        else if constexpr (std::is_same_v<S, Ball>) return s.radius;
        else {
          const auto n = static_cast<double>(s.dimension);
          return 1.0 / std::sqrt(n * (n - 1.0));
        }
      },
      set.shape());
}

/// Support function: max over the set of <w, x>.
inline double support(const FeasibleSet& set, const Point& w) {
  detail::check_dimension(set, w, "support");
  return std::visit(
      [&w](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Box>) {
          return w.cwiseProduct(s.lower).cwiseMax(w.cwiseProduct(s.upper)).sum();
        } else if constexpr (std::is_same_v<S, Ball>) {
          return w.dot(s.center) + s.radius * w.norm();
        } else {
          return w.maxCoeff();
        }
      },
      set.shape());
}

/// max over x in the set of ||x - p||; the set's vertices (or sphere) attain it.
inline double farthest_distance(const FeasibleSet& set, const Point& p) {
  detail::check_dimension(set, p, "farthest_distance");
  return std::visit(
      [&p](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Box>) {
          return (p - s.lower).cwiseAbs().cwiseMax((p - s.upper).cwiseAbs()).norm();
        } else if constexpr (std::is_same_v<S, Ball>) {
          return distance(p, s.center) + s.radius;
        } else {
          // ||p - e_i||^2 = ||p||^2 - 2 p_i + 1, largest at the smallest coordinate.
          return std::sqrt(std::max(0.0, p.squaredNorm() - 2.0 * p.minCoeff() + 1.0));
        }
      },
      set.shape());
}

/// Random point of the set: uniform for boxes and balls, flat Dirichlet on the simplex.
inline Point sample_point(const FeasibleSet& set, SplitMix64& rng) {
  return std::visit(
      [&rng](const auto& s) -> Point {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Box>) {
          Point p(s.lower.size());
          for (Index i = 0; i < p.size(); ++i) p[i] = rng.uniform(s.lower[i], s.upper[i]);
          return p;
        } else if constexpr (std::is_same_v<S, Ball>) {
          const Index n = s.center.size();
          Point direction = rng.normal_point(n);
          double norm = direction.norm();
          while (norm == 0.0) {
            direction = rng.normal_point(n);
            norm = direction.norm();
          }
          const double r = s.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
          return s.center + (r / norm) * direction;
        } else {
          Point p(s.dimension);
          for (Index i = 0; i < p.size(); ++i) p[i] = -std::log(1.0 - rng.uniform());
          return p / p.sum();
        }
      },
      set.shape());
}

}  // namespace dynreg

#endif  // DYNREG_GEOMETRY_HPP
