#include <gtest/gtest.h>

#include <filesystem>

#include "dynreg/config.hpp"

using namespace dynreg;

namespace {

json base_config() {
  return json::parse(R"({
    "name": "t",
    "scenario": {"horizon": 10, "seed": 1,
                 "set": {"kind": "ball", "center": [0, 0], "radius": 1.0},
                 "drift": {"kind": "constant_step", "delta": 0.1},
                 "mix": ["quadratic", "huber"]},
    "learner": {"algorithm": "uniclass_ogd", "loss": {"loss": "squared"}},
    "assertions": {"check_contraction": true, "check_theorem1": true}
  })");
}

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, BundledConfigsParse) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(DYNREG_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 5);
}

TEST(Config, ParsesFields) {
  const auto c = parse_config(base_config());
  EXPECT_EQ(c.name, "t");
  EXPECT_EQ(c.scenario.horizon, 10);
  EXPECT_EQ(c.scenario.mix.size(), 2u);
  EXPECT_EQ(c.learner.algorithm, Algorithm::uniclass_ogd);
  EXPECT_FALSE(c.learner.eta.has_value());
  EXPECT_TRUE(c.assertions.check_theorem1);
  EXPECT_FALSE(c.assertions.check_theorem2);
}

TEST(Config, UnknownKeysNamed) {
  auto j = base_config();
  j["scenario"]["set"]["radious"] = 2.0;
  EXPECT_NE(error_of(j).find("scenario.set.radious"), std::string::npos) << error_of(j);
}

TEST(Config, LearnerSchemaHasNoModulusFields) {
  for (const char* key : {"strong_convexity", "lambda_f", "modulus", "exp_concavity", "alpha", "curvature"}) {
    auto j = base_config();
    j["learner"][key] = 1.0;
    EXPECT_NE(error_of(j).find(std::string("learner.") + key + "': unknown key"), std::string::npos) << key;
  }
}

TEST(Config, EtaAboveInverseSmoothnessRejected) {
  auto j = base_config();
  j["learner"]["eta"] = 1.5;
  const auto msg = error_of(j);
  EXPECT_NE(msg.find("learner.eta"), std::string::npos);
  EXPECT_NE(msg.find("contraction precondition"), std::string::npos);
}

TEST(Config, Theorem2NeedsSmoothScenarioAndOmgd) {
  auto j = base_config();
  j["assertions"]["check_theorem2"] = true;
  EXPECT_NE(error_of(j).find("uniclass_omgd"), std::string::npos);
  j["learner"]["algorithm"] = "uniclass_omgd";
  EXPECT_EQ(error_of(j), "");
  j["scenario"]["mix"] = {"quadratic", "norm_distance"};
  EXPECT_NE(error_of(j).find("norm_distance"), std::string::npos);
}

TEST(Config, ContractionChecksNeedUniclassLearner) {
  auto j = base_config();
  j["learner"] = {{"algorithm", "baseline_ogd"}};
  EXPECT_NE(error_of(j).find("assertions"), std::string::npos);
}

TEST(Config, TypeAndRangeErrors) {
  auto j = base_config();
  j["scenario"]["horizon"] = 2.5;
  EXPECT_NE(error_of(j).find("scenario.horizon"), std::string::npos);
  j = base_config();
  j["scenario"]["set"]["radius"] = -1;
  EXPECT_NE(error_of(j).find("scenario.set.radius"), std::string::npos);
  j = base_config();
  j["scenario"]["mix"] = {"cubic"};
  EXPECT_NE(error_of(j).find("scenario.mix"), std::string::npos);
  j = base_config();
  j["learner"]["x1"] = {0.0, 0.0, 0.0};
  EXPECT_NE(error_of(j).find("learner.x1"), std::string::npos);
  j = base_config();
  j.erase("learner");
  EXPECT_NE(error_of(j).find("learner"), std::string::npos);
}

TEST(Config, InnerIterationsAutoOrInteger) {
  auto j = base_config();
  j["learner"]["algorithm"] = "uniclass_omgd";
  j["learner"]["inner_iterations"] = "auto";
  EXPECT_FALSE(parse_config(j).learner.inner_iterations.has_value());
  j["learner"]["inner_iterations"] = 7;
  EXPECT_EQ(*parse_config(j).learner.inner_iterations, 7);
}

TEST(Config, MissingFileIsError) {
  EXPECT_ANY_THROW(load_config("/nonexistent/config.json"));
}

TEST(Config, DigestIsStableAndKeyOrderIndependent) {
  const json a = json::parse(R"({"b": 1, "a": [1, 2]})");
  const json b = json::parse(R"({"a": [1, 2], "b": 1})");
  EXPECT_EQ(digest(a), digest(b));
  EXPECT_EQ(digest(a).size(), 16u);
  EXPECT_NE(digest(a), digest(json::parse(R"({"a": [1, 2], "b": 2})")));
}
