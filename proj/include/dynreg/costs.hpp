#ifndef DYNREG_COSTS_HPP
#define DYNREG_COSTS_HPP

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dynreg/geometry.hpp"
#include "dynreg/solver.hpp"

namespace dynreg {

/// (curvature / 2) ||x - center||^2
struct Quadratic {
  Point center;
  double curvature = 1.0;
};

/// h(||x - center||) with h(r) = r^2/2 for r <= threshold, threshold (r - threshold/2) beyond.
struct Huber {
  Point center;
  double threshold = 1.0;
};

/// ||x - center||
struct NormDistance {
  Point center;
};

/// log(1 + exp(-label <feature, x>))
struct LogLoss {
  Point feature;
  int label = 1;
};

enum class ConvexityClass { convex, strongly_convex, exp_concave };

struct ClassTag {
  ConvexityClass kind = ConvexityClass::convex;
  double modulus = 0.0;  // unused for plain convex
};

inline std::string to_string(ConvexityClass c) {
  switch (c) {
    case ConvexityClass::convex: return "convex";
    case ConvexityClass::strongly_convex: return "strongly_convex";
    default: return "exp_concave";
  }
}

/// One round's cost. Constants are computed over the feasible set the cost is built for.
class CostFunction {
 public:
  using Family = std::variant<Quadratic, Huber, NormDistance, LogLoss>;

  static CostFunction quadratic(Point center, double curvature, const FeasibleSet& set) {
    require(std::isfinite(curvature) && curvature > 0.0, "quadratic: curvature must be positive");
    check_point(center, set, "quadratic");
    const double K = curvature * farthest_distance(set, center);
    return CostFunction(Quadratic{std::move(center), curvature},
                        {ConvexityClass::strongly_convex, curvature}, K, curvature);
  }

  static CostFunction huber(Point center, double threshold, const FeasibleSet& set) {
    require(std::isfinite(threshold) && threshold > 0.0, "huber: threshold must be positive");
    check_point(center, set, "huber");
    const double K = std::min(threshold, farthest_distance(set, center));
    return CostFunction(Huber{std::move(center), threshold}, {ConvexityClass::convex, 0.0}, K, 1.0);
  }

  static CostFunction norm_distance(Point center, const FeasibleSet& set) {
    check_point(center, set, "norm_distance");
    return CostFunction(NormDistance{std::move(center)}, {ConvexityClass::convex, 0.0}, 1.0,
                        std::nullopt);
  }

  static CostFunction logloss(Point feature, int label, const FeasibleSet& set) {
    require(label == 1 || label == -1, "logloss: label must be +1 or -1");
    check_point(feature, set, "logloss");
    require(feature.norm() > 0.0, "logloss: feature must be nonzero");
    // With z = label <a, x>, |f'| = sigma(-z) and f''/f'^2 = e^z, so over the set the
    // gradient norm is at most ||a|| sigma(-z_min) and f is e^{z_min}-exp-concave.
    const Point w = static_cast<double>(label) * feature;
    const double z_min = -support(set, -w);
    const double K = feature.norm() / (1.0 + std::exp(z_min));
    const double L = 0.25 * feature.squaredNorm();
    return CostFunction(LogLoss{std::move(feature), label}, {ConvexityClass::exp_concave, std::exp(z_min)},
                        K, L);
  }

  const Family& family() const { return family_; }
  const ClassTag& class_tag() const { return tag_; }
  /// Lipschitz constant over the feasible set.
  double lipschitz_K() const { return lipschitz_; }
  /// Smoothness constant, absent for nonsmooth families.
  std::optional<double> smooth_L() const { return smooth_; }

  std::string family_name() const {
    switch (family_.index()) {
      case 0: return "quadratic";
      case 1: return "huber";
      case 2: return "norm_distance";
      default: return "logloss";
    }
  }

  Index dimension() const {
    return std::visit(
        [](const auto& f) -> Index {
          if constexpr (std::is_same_v<std::decay_t<decltype(f)>, LogLoss>) return f.feature.size();
          else return f.center.size();
        },
        family_);
  }

  // Objective concept, so the solver can minimize a cost directly.
  double value(const Point& x) const;
  Point gradient(const Point& x) const;

 private:
  CostFunction(Family family, ClassTag tag, double K, std::optional<double> L)
      : family_(std::move(family)), tag_(tag), lipschitz_(K), smooth_(L) {}

  static void check_point(const Point& p, const FeasibleSet& set, const char* where) {
    require(all_finite(p), std::string(where) + ": parameters must be finite");
    detail::check_dimension(set, p, where);
  }

  Family family_;
  ClassTag tag_;
  double lipschitz_;
  std::optional<double> smooth_;
};

namespace detail {

/// log(1 + exp(-z)) without overflow.
inline double softplus_neg(double z) {
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

/// 1 / (1 + exp(z))
inline double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

inline void check_cost_dimension(const CostFunction& f, const Point& x, const char* where) {
  if (x.size() != f.dimension()) {
    throw UsageError(std::string(where) + ": point has dimension " + std::to_string(x.size()) +
                     " but cost has dimension " + std::to_string(f.dimension()));
  }
}

}  // namespace detail

inline double eval(const CostFunction& f, const Point& x) {
  detail::check_cost_dimension(f, x, "eval");
  return std::visit(
      [&x](const auto& c) -> double {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, Quadratic>) {
          return 0.5 * c.curvature * squared_distance(x, c.center);
        } else if constexpr (std::is_same_v<C, Huber>) {
          const double r = distance(x, c.center);
          return r <= c.threshold ? 0.5 * r * r : c.threshold * (r - 0.5 * c.threshold);
        } else if constexpr (std::is_same_v<C, NormDistance>) {
          return distance(x, c.center);
        } else {
          return detail::softplus_neg(static_cast<double>(c.label) * c.feature.dot(x));
        }
      },
      f.family());
}

/// Analytic gradient. NormDistance at its center returns the zero subgradient.
inline Point gradient(const CostFunction& f, const Point& x) {
  detail::check_cost_dimension(f, x, "gradient");
  return std::visit(
      [&x](const auto& c) -> Point {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, Quadratic>) {
          return c.curvature * (x - c.center);
        } else if constexpr (std::is_same_v<C, Huber>) {
          const Point d = x - c.center;
          const double r = d.norm();
          return r <= c.threshold ? d : Point((c.threshold / r) * d);
        } else if constexpr (std::is_same_v<C, NormDistance>) {
          const Point d = x - c.center;
          const double r = d.norm();
          return r == 0.0 ? Point(Point::Zero(x.size())) : Point(d / r);
        } else {
          const double y = static_cast<double>(c.label);
          return -y * detail::sigmoid_neg(y * c.feature.dot(x)) * c.feature;
        }
      },
      f.family());
}

inline double CostFunction::value(const Point& x) const { return eval(*this, x); }
inline Point CostFunction::gradient(const Point& x) const { return dynreg::gradient(*this, x); }

struct MinimizerResult {
  Point point;
  bool converged = true;
  double residual = 0.0;
};

namespace detail {

/// argmin over the set of a strictly decreasing function of <w, x>, projected from x.
inline Point linear_maximizer_projection(const FeasibleSet& set, const Point& w, const Point& x) {
  return std::visit(
      [&](const auto& s) -> Point {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Box>) {
          Point out(w.size());
          for (Index i = 0; i < w.size(); ++i) {
            if (w[i] > 0.0) out[i] = s.upper[i];
            else if (w[i] < 0.0) out[i] = s.lower[i];
            else out[i] = std::clamp(x[i], s.lower[i], s.upper[i]);
          }
          return out;
        } else if constexpr (std::is_same_v<S, Ball>) {
          const double norm = w.norm();
          if (norm == 0.0) return project(FeasibleSet::ball(s.center, s.radius), x);
          return s.center + (s.radius / norm) * w;
        } else {
          // Face spanned by the vertices with maximal weight.
          const double top = w.maxCoeff();
          std::vector<Index> face;
          for (Index i = 0; i < w.size(); ++i)
            if (w[i] == top) face.push_back(i);
          Point out = Point::Zero(w.size());
          if (face.size() == 1) {
            out[face.front()] = 1.0;
            return out;
          }
          Point sub(static_cast<Index>(face.size()));
          for (std::size_t k = 0; k < face.size(); ++k) sub[static_cast<Index>(k)] = x[face[k]];
          const Point projected = project_unit_simplex(sub);
          for (std::size_t k = 0; k < face.size(); ++k) out[face[k]] = projected[static_cast<Index>(k)];
          return out;
        }
      },
      set.shape());
}

}  // namespace detail

/// Point of argmin_{z in set} f(z) nearest to x, in closed form for every shipped family.
inline MinimizerResult minimizer_projection(const CostFunction& f, const FeasibleSet& set, const Point& x) {
  detail::check_cost_dimension(f, x, "minimizer_projection");
  detail::check_dimension(set, x, "minimizer_projection");
  return std::visit(
      [&](const auto& c) -> MinimizerResult {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, LogLoss>) {
          // Strictly decreasing in label <a, x>: maximize that linear form over the set.
          return {detail::linear_maximizer_projection(set, static_cast<double>(c.label) * c.feature, x)};
        } else {
          // Strictly increasing in ||x - center||: the projection of the center.
          return {project(set, c.center)};
        }
      },
      f.family());
}

/// True when argmin over the set is a single point.
inline bool has_unique_minimizer(const CostFunction& f, const FeasibleSet& set) {
  const auto* log = std::get_if<LogLoss>(&f.family());
  if (!log) return true;
  const Point w = static_cast<double>(log->label) * log->feature;
  return std::visit(
      [&w](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Box>) {
          for (Index i = 0; i < w.size(); ++i)
            if (w[i] == 0.0 && s.lower[i] < s.upper[i]) return false;
          return true;
        } else if constexpr (std::is_same_v<S, Ball>) {
          return w.norm() > 0.0;
        } else {
          const double top = w.maxCoeff();
          return (w.array() == top).count() == 1;
        }
      },
      set.shape());
}

/// Black-box minimizer oracle: projected gradient from a warm start. Only meaningful for
/// families with a unique minimizer, where the result does not depend on x.
inline MinimizerResult solve_minimizer(const CostFunction& f, const FeasibleSet& set, const Point& warm_start,
                                       SolveOptions options = {}) {
  if (!options.smooth_L) options.smooth_L = f.smooth_L();
  if (!options.strong_modulus && f.class_tag().kind == ConvexityClass::strongly_convex)
    options.strong_modulus = f.class_tag().modulus;
  const SolveResult solved = minimize(f, set, warm_start, options);
  return {solved.x_star, solved.converged, solved.residual};
}

}  // namespace dynreg

#endif  // DYNREG_COSTS_HPP
