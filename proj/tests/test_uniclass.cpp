#include <gtest/gtest.h>

#include "dynreg/selftest.hpp"
#include "dynreg/uniclass.hpp"

using namespace dynreg;

TEST(LossEval, Examples) {
  EXPECT_DOUBLE_EQ(loss_eval(UniclassLoss::squared(), make_point({1.0, 0.0}), Point::Zero(2)), 0.5);
  const auto eps = UniclassLoss::epsilon_insensitive(0.5);
  EXPECT_DOUBLE_EQ(loss_eval(eps, make_point({0.3, 0.0}), Point::Zero(2)), 0.0);
  EXPECT_DOUBLE_EQ(loss_eval(eps, make_point({0.0, 1.0}), Point::Zero(2)), 0.5);
  EXPECT_DOUBLE_EQ(loss_eval(UniclassLoss::scaled_squared(4.0), make_point({1.0, 0.0}), Point::Zero(2)), 2.0);
}

TEST(LossGradient, Examples) {
  EXPECT_EQ(loss_gradient(UniclassLoss::squared(), make_point({1.0, 0.0}), Point::Zero(2)), make_point({1.0, 0.0}));
  const Point t = make_point({0.4, -0.2});
  EXPECT_EQ(loss_gradient(UniclassLoss::squared(), t, t).norm(), 0.0);
  EXPECT_EQ(loss_gradient(UniclassLoss::scaled_squared(3.0), t, t).norm(), 0.0);
}

TEST(LossGradient, EpsilonInsensitiveFlatInsideAndAtKink) {
  const auto eps = UniclassLoss::epsilon_insensitive(0.5);
  EXPECT_EQ(loss_gradient(eps, make_point({0.2, 0.0}), Point::Zero(2)).norm(), 0.0);
  EXPECT_EQ(loss_gradient(eps, make_point({0.5, 0.0}), Point::Zero(2)).norm(), 0.0);
  EXPECT_EQ(loss_gradient(eps, Point::Zero(2), Point::Zero(2)).norm(), 0.0);
  EXPECT_EQ(loss_gradient(eps, make_point({0.0, 2.0}), Point::Zero(2)), make_point({0.0, 1.0}));
}

TEST(LossGradient, FiniteDifference) { EXPECT_TRUE(property_loss_gradients(100).passed); }

TEST(ValidateLoss, SquaredPasses) {
  const auto r = validate_loss(UniclassLoss::squared(), FeasibleSet::ball(Point::Zero(3), 1.0), 1000, 1);
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.failures.empty());
}

TEST(ValidateLoss, OverdeclaredStrongConvexityFails) {
  const auto loss = UniclassLoss::scaled_squared(2.0).with_declared_moduli(3.0, 2.0);
  const auto r = validate_loss(loss, FeasibleSet::ball(Point::Zero(3), 1.0), 1000, 1);
  EXPECT_FALSE(r.passed);
  EXPECT_LT(r.strong_convexity_slack, -1e-9);
  EXPECT_GE(r.smoothness_slack, -1e-9);
}

TEST(ValidateLoss, EpsilonInsensitiveFailsForAnyDeclaredModulus) {
  const auto set = FeasibleSet::box(make_point({0.0, 0.0}), make_point({1.0, 1.0}));
  for (double lambda : {1e-3, 0.5, 2.0}) {
    const auto loss = UniclassLoss::epsilon_insensitive(0.2).with_declared_moduli(lambda, 10.0);
    EXPECT_FALSE(validate_loss(loss, set, 1000, 2).passed) << lambda;
  }
  EXPECT_FALSE(validate_loss(UniclassLoss::epsilon_insensitive(0.2), set, 100, 2).passed);
}

TEST(ValidateLoss, SelftestProperties) {
  EXPECT_TRUE(property_loss_validation(500).passed);
  EXPECT_TRUE(property_loss_validation_rejects(500).passed);
}

TEST(UniclassLoss, RejectsNonpositiveLambda) {
  EXPECT_THROW(UniclassLoss::scaled_squared(0.0), UsageError);
  EXPECT_THROW(UniclassLoss::epsilon_insensitive(-0.1), UsageError);
}
