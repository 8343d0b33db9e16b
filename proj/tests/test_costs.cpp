#include <gtest/gtest.h>

#include <cmath>

#include "dynreg/costs.hpp"
#include "dynreg/selftest.hpp"

using namespace dynreg;

namespace {

const FeasibleSet kUnitBall2 = FeasibleSet::ball(Point::Zero(2), 1.0);

}  // namespace

TEST(Eval, Examples) {
  const Point c = make_point({0.3, -0.2});
  EXPECT_DOUBLE_EQ(eval(CostFunction::quadratic(c, 1.0, kUnitBall2), c), 0.0);
  EXPECT_DOUBLE_EQ(eval(CostFunction::quadratic(Point::Zero(2), 2.0, kUnitBall2), make_point({1.0, 0.0})), 1.0);
  EXPECT_DOUBLE_EQ(eval(CostFunction::norm_distance(Point::Zero(2), kUnitBall2), make_point({3.0, 4.0})), 5.0);
}

TEST(Eval, HuberBranches) {
  const auto f = CostFunction::huber(Point::Zero(1), 0.5, FeasibleSet::ball(Point::Zero(1), 5.0));
  EXPECT_DOUBLE_EQ(eval(f, make_point({0.4})), 0.08);
  EXPECT_DOUBLE_EQ(eval(f, make_point({2.0})), 0.5 * (2.0 - 0.25));
}

TEST(Eval, LoglossIsStableForLargeMargins) {
  const auto set = FeasibleSet::ball(Point::Zero(1), 1000.0);
  const auto f = CostFunction::logloss(make_point({1.0}), 1, set);
  EXPECT_NEAR(eval(f, make_point({-800.0})), 800.0, 1e-9);
  EXPECT_GE(eval(f, make_point({800.0})), 0.0);
  EXPECT_TRUE(std::isfinite(gradient(f, make_point({-800.0}))[0]));
}

TEST(Gradient, QuadraticExample) {
  const Point g = gradient(CostFunction::quadratic(Point::Zero(2), 2.0, kUnitBall2), make_point({1.0, 0.0}));
  EXPECT_EQ(g, make_point({2.0, 0.0}));
}

TEST(Gradient, ZeroAtInteriorMinimizer) {
  const Point c = make_point({0.2, 0.1});
  for (const auto& f : {CostFunction::quadratic(c, 3.0, kUnitBall2), CostFunction::huber(c, 0.4, kUnitBall2),
                        CostFunction::norm_distance(c, kUnitBall2)}) {
    EXPECT_EQ(gradient(f, c).norm(), 0.0) << f.family_name();
  }
}

TEST(Gradient, HuberFiniteDifferenceHundredPoints) {
  SplitMix64 rng(41);
  const auto set = FeasibleSet::ball(Point::Zero(3), 2.0);
  int checked = 0;
  while (checked < 100) {
    const auto f = CostFunction::huber(rng.normal_point(3), rng.uniform(0.2, 1.0), set);
    const Point x = sample_point(set, rng);
    if (selftest::near_kink(f, x)) continue;
    const Point fd = selftest::finite_difference([&f](const Point& p) { return eval(f, p); }, x);
    EXPECT_LE(selftest::relative_gradient_error(gradient(f, x), fd), 1e-6);
    ++checked;
  }
}

TEST(Gradient, AllFamiliesFiniteDifference) {
  const auto r = property_cost_gradients(100);
  EXPECT_TRUE(r.passed) << r.worst_slack;
}

TEST(CostFunction, RejectsBadParameters) {
  EXPECT_THROW(CostFunction::quadratic(Point::Zero(2), 0.0, kUnitBall2), UsageError);
  EXPECT_THROW(CostFunction::huber(Point::Zero(2), -1.0, kUnitBall2), UsageError);
  EXPECT_THROW(CostFunction::logloss(Point::Zero(2), 1, kUnitBall2), UsageError);
  EXPECT_THROW(CostFunction::logloss(make_point({1.0, 0.0}), 0, kUnitBall2), UsageError);
  EXPECT_THROW(CostFunction::quadratic(Point::Zero(3), 1.0, kUnitBall2), UsageError);
  EXPECT_THROW(eval(CostFunction::quadratic(Point::Zero(2), 1.0, kUnitBall2), Point::Zero(3)), UsageError);
}

TEST(CostFunction, ClassTags) {
  EXPECT_EQ(CostFunction::quadratic(Point::Zero(2), 2.0, kUnitBall2).class_tag().kind,
            ConvexityClass::strongly_convex);
  EXPECT_EQ(CostFunction::huber(Point::Zero(2), 1.0, kUnitBall2).class_tag().kind, ConvexityClass::convex);
  EXPECT_FALSE(CostFunction::norm_distance(Point::Zero(2), kUnitBall2).smooth_L().has_value());
  EXPECT_EQ(CostFunction::logloss(make_point({1.0, 1.0}), -1, kUnitBall2).class_tag().kind,
            ConvexityClass::exp_concave);
}

TEST(CostFunction, LoglossExpConcavityModulus) {
  // exp(-beta f) concave along random segments of the set.
  SplitMix64 rng(43);
  const auto f = CostFunction::logloss(make_point({1.5, -0.5}), 1, kUnitBall2);
  const double beta = f.class_tag().modulus;
  for (int i = 0; i < 1000; ++i) {
    const Point x = sample_point(kUnitBall2, rng), y = sample_point(kUnitBall2, rng);
    const auto h = [&](const Point& p) { return std::exp(-beta * eval(f, p)); };
    EXPECT_GE(h(0.5 * (x + y)), 0.5 * (h(x) + h(y)) - 1e-12);
  }
}

TEST(MinimizerProjection, QuadraticInsideAndOutside) {
  const Point inside = make_point({0.1, 0.2});
  const auto f = CostFunction::quadratic(inside, 1.0, kUnitBall2);
  EXPECT_EQ(minimizer_projection(f, kUnitBall2, make_point({-0.5, 0.5})).point, inside);
  const Point outside = make_point({3.0, 4.0});
  const auto g = CostFunction::quadratic(outside, 2.0, kUnitBall2);
  EXPECT_LE(distance(minimizer_projection(g, kUnitBall2, Point::Zero(2)).point, make_point({0.6, 0.8})), 1e-15);
}

TEST(MinimizerProjection, LoglossOverBoxMatchesGridScanAndSolver) {
  SplitMix64 rng(47);
  const auto box = FeasibleSet::box(make_point({-2.0, -2.0}), make_point({2.0, 2.0}));
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = CostFunction::logloss(rng.normal_point(2), trial % 2 ? 1 : -1, box);
    ASSERT_TRUE(has_unique_minimizer(f, box));
    const Point closed = minimizer_projection(f, box, Point::Zero(2)).point;

    Point best = Point::Zero(2);
    double best_value = INFINITY;
    for (int i = 0; i <= 400; ++i)
      for (int j = 0; j <= 400; ++j) {
        const Point z = make_point({-2.0 + 0.01 * i, -2.0 + 0.01 * j});
        const double v = eval(f, z);
        if (v < best_value) best_value = v, best = z;
      }
    EXPECT_LE(distance(closed, best), 1e-12);

    SolveOptions options;
    options.tol = 1e-9;
    const auto solved = solve_minimizer(f, box, Point::Zero(2), options);
    EXPECT_TRUE(solved.converged);
    EXPECT_LE(distance(closed, solved.point), 1e-6);
  }
}

TEST(MinimizerProjection, LoglossSimplexTieUsesFace) {
  const auto simplex = FeasibleSet::simplex(3);
  const auto f = CostFunction::logloss(make_point({1.0, 1.0, 0.0}), 1, simplex);
  EXPECT_FALSE(has_unique_minimizer(f, simplex));
  const Point p = minimizer_projection(f, simplex, make_point({0.9, 0.0, 0.1})).point;
  EXPECT_NEAR(p[0], 0.95, 1e-15);
  EXPECT_NEAR(p[1], 0.05, 1e-15);
  EXPECT_EQ(p[2], 0.0);
}

TEST(CostProperties, LipschitzSampling) { EXPECT_TRUE(property_lipschitz(1000).passed); }
TEST(CostProperties, MinimizerGap) { EXPECT_TRUE(property_minimizer_gap(1000).passed); }
TEST(CostProperties, MinimizerOptimality) { EXPECT_TRUE(property_minimizer_optimality(1000).passed); }
TEST(CostProperties, Smoothness) { EXPECT_TRUE(property_smoothness(1000).passed); }
TEST(CostProperties, StrongConvexity) { EXPECT_TRUE(property_strong_convexity(1000).passed); }
TEST(CostProperties, StrongConvexityGap) { EXPECT_TRUE(property_strong_convexity_gap(1000).passed); }

TEST(CostProperties, QuadraticLipschitzTightForOutsideCenter) {
  // K is attained: farthest point of the set from the center.
  const auto f = CostFunction::quadratic(make_point({3.0, 0.0}), 1.0, kUnitBall2);
  EXPECT_DOUBLE_EQ(f.lipschitz_K(), 4.0);
  EXPECT_DOUBLE_EQ(gradient(f, make_point({-1.0, 0.0})).norm(), 4.0);
}
