#ifndef DYNREG_SOLVER_HPP
#define DYNREG_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>

#include "dynreg/geometry.hpp"

namespace dynreg {

template <class F>
concept Objective = requires(const F& f, const Point& x) {
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Point>;
};

inline constexpr double kDefaultSolverTolerance = 1e-9;
inline constexpr std::int64_t kDefaultSolverMaxIter = 100000;

struct SolveOptions {
  double tol = kDefaultSolverTolerance;
  std::int64_t max_iter = kDefaultSolverMaxIter;
  /// Known smoothness constant; enables the fixed 1/L step. Otherwise backtracking.
  std::optional<double> smooth_L;
  /// Known strong-convexity modulus; caps the iteration count at the linear-rate bound.
  std::optional<double> strong_modulus;
  /// Called with (iteration, iterate, objective) after every accepted step.
  std::function<void(std::int64_t, const Point&, double)> observer;
};

struct SolveResult {
  Point x_star;
  double f_star = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
  /// L * ||x - P(x - grad f(x) / L)||, the projected-gradient mapping norm at x_star.
  double residual = 0.0;
};

namespace detail {

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string("minimize: non-finite ") + what);
  return v;
}

/// Iterations after which PGD with step 1/L on a mu-strongly convex function must have
/// pushed the mapping norm from r0 below tol: ||G(x_k)|| <= 2L (1-mu/L)^k (2/mu) r0.
inline std::int64_t strong_iteration_bound(double L, double mu, double r0, double tol) {
  if (mu >= L) return 2;
  const double ratio = std::max(1.0, 4.0 * L * r0 / (mu * tol));
  return static_cast<std::int64_t>(std::ceil(std::log(ratio) / -std::log1p(-mu / L))) + 1;
}

}  // namespace detail

/// Projected gradient descent over `set`, started from the projection of `start`.
template <Objective F>
SolveResult minimize(const F& f, const FeasibleSet& set, const Point& start, const SolveOptions& options = {}) {
  require(options.tol > 0.0, "minimize: tol must be positive");
  require(options.max_iter > 0, "minimize: max_iter must be positive");
  require(!options.smooth_L || *options.smooth_L > 0.0, "minimize: smooth_L must be positive");

  Point x = project(set, start);
  double fx = detail::checked(f.value(x), "objective");
  const bool fixed_step = options.smooth_L.has_value();
  double L = fixed_step ? *options.smooth_L : 1.0;
  std::int64_t max_iter = options.max_iter;

  SolveResult result;
  for (std::int64_t k = 0;; ++k) {
    const Point g = f.gradient(x);
    if (!g.allFinite()) throw NumericError("minimize: non-finite gradient");

    Point next = project(set, x - g / L);
    double f_next = detail::checked(f.value(next), "objective");
    if (!fixed_step) {
      // Backtrack until the quadratic upper model at x dominates f(next).
      while (L < 1e15) {
        const Point step = next - x;
        if (f_next <= fx + g.dot(step) + 0.5 * L * step.squaredNorm() + 1e-15 * std::abs(fx)) break;
        L *= 2.0;
        next = project(set, x - g / L);
        f_next = detail::checked(f.value(next), "objective");
      }
    }

    const double residual = L * distance(x, next);
    if (k == 0 && options.strong_modulus && fixed_step) {
      max_iter = std::min(max_iter, 2 * detail::strong_iteration_bound(L, *options.strong_modulus,
                                                                       residual, options.tol) + 10);
    }
    if (residual <= options.tol || k >= max_iter) {
      result.x_star = x;
      result.f_star = fx;
      result.iterations = k;
      result.converged = residual <= options.tol;
      result.residual = residual;
      return result;
    }

    x = std::move(next);
    fx = f_next;
    if (options.observer) options.observer(k + 1, x, fx);
  }
}

/// x -> g'(x - anchor) + ||x - anchor||^2 / (2 eta): the model problem whose minimizer over
/// the set is the projected gradient step from `anchor`.
struct ProximalModel {
  Point g;
  Point anchor;
  double eta = 1.0;

  double value(const Point& x) const {
    const Point d = x - anchor;
    return g.dot(d) + d.squaredNorm() / (2.0 * eta);
  }
  Point gradient(const Point& x) const { return g + (x - anchor) / eta; }
};

/// Closed-form minimizer of ProximalModel over the set: P(x_t - eta g).
inline Point proximal_step(const Point& g, const Point& x_t, double eta, const FeasibleSet& set) {
  require(eta > 0.0, "proximal_step: eta must be positive");
  require_same_dimension(g, x_t, "proximal_step");
  return project(set, x_t - eta * g);
}

}  // namespace dynreg

#endif  // DYNREG_SOLVER_HPP
