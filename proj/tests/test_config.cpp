#include <gtest/gtest.h>

#include <fstream>
#include <string>

#include "scanstat/config.hpp"

using namespace scanstat;
using nlohmann::json;

namespace {

json base() {
  return json{{"model", "minesweeper"}, {"p", 0.1},  {"source_cols", 44}, {"source_rows", 44},
              {"m1", 3},              {"m2", 3},   {"thresholds", {31, 32}}, {"iter", 1000}};
}

std::string rejected_key(const json& j) {
  try {
    validate(parse_config(j));
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

TEST(ParseConfig, MinimalMinesweeper) {
  const auto cfg = parse_config(base());
  EXPECT_NO_THROW(validate(cfg));
  const auto spec = to_spec(cfg);
  EXPECT_EQ(spec.geometry.derived_cols(), 42u);
  EXPECT_EQ(spec.transform.name, minesweeper_transform().name);
  EXPECT_EQ(spec.thresholds, (std::vector<double>{31, 32}));
  EXPECT_TRUE(integer_scan(spec));
}

TEST(ParseConfig, ThresholdRange) {
  auto j = base();
  j.erase("thresholds");
  j["n_min"] = 29;
  j["n_max"] = 33;
  EXPECT_EQ(parse_config(j).thresholds, (std::vector<double>{29, 30, 31, 32, 33}));
  j["n_max"] = 20;
  EXPECT_EQ(rejected_key(j), "n_max");
  j["thresholds"] = {1};
  EXPECT_EQ(rejected_key(j), "thresholds");
}

TEST(ParseConfig, MovingAverageDefaults) {
  const json j = {{"model", "ma"}, {"coeffs", {0.3, 0.1, 0.5}}, {"cols", 1000}, {"m1", 20}, {"thresholds", {12.5}}};
  const auto cfg = parse_config(j);
  EXPECT_EQ(cfg.source_cols, 1002u);
  EXPECT_EQ(cfg.source_rows, 1u);
  EXPECT_EQ(cfg.m2, 1u);
  EXPECT_EQ(cfg.distribution, "gaussian");
  EXPECT_NO_THROW(validate(cfg));
  EXPECT_TRUE(independent_rows(to_spec(cfg)));
}

TEST(Validation, ErrorsNameTheKey) {
  auto j = base();
  j["bogus"] = 1;
  EXPECT_EQ(rejected_key(j), "bogus");
  j = base();
  j["p"] = 1.5;
  EXPECT_EQ(rejected_key(j), "p");
  j = base();
  j["m1"] = "three";
  EXPECT_EQ(rejected_key(j), "m1");
  j = base();
  j["m1"] = 50;
  EXPECT_EQ(rejected_key(j), "m1");
  j = base();
  j["iter"] = 10;
  EXPECT_EQ(rejected_key(j), "iter");
  j = base();
  j["thresholds"] = {31.5};
  EXPECT_EQ(rejected_key(j), "thresholds");
  j = base();
  j["model"] = "ising";
  EXPECT_EQ(rejected_key(j), "model");
  j = base();
  j.erase("source_rows");
  EXPECT_EQ(rejected_key(j), "source_rows");
  j = base();
  j["source_cols"] = 7;
  EXPECT_EQ(rejected_key(j), "source_cols");
  j = base();
  j["l_mode"] = "both";
  EXPECT_EQ(rejected_key(j), "l_mode");
  j = base();
  j["coeffs"] = {1.0};
  EXPECT_EQ(rejected_key(j), "coeffs");
}

TEST(Validation, ZeroReplicas) {
  auto j = base();
  j["sim_replicas"] = 0;
  try {
    validate(parse_config(j));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "sim_replicas");
    EXPECT_NE(std::string(e.what()).find("replicas must be ≥ 1"), std::string::npos);
  }
}

TEST(Validation, RealThresholdsAllowedForGaussian) {
  auto j = base();
  j["model"] = "identity";
  j["distribution"] = "gaussian";
  j["thresholds"] = {1.25, 2.5};
  EXPECT_NO_THROW(validate(parse_config(j)));
}

TEST(ToJson, RoundTrip) {
  auto cfg = parse_config(base());
  cfg.l_mode = LSelection::optimize;
  const auto again = parse_config(to_json(cfg));
  EXPECT_EQ(to_json(again), to_json(cfg));
}

TEST(Schema, IsValidJsonListingEveryKey) {
  const auto schema = json::parse(run_config_schema());
  for (const char* key : {"model", "distribution", "source_cols", "thresholds", "iter", "sim_replicas", "l_mode"})
    EXPECT_TRUE(schema["properties"].contains(key)) << key;
  std::ifstream published(std::string(SCANSTAT_CONFIG_DIR) + "/schema.json");
  ASSERT_TRUE(published);
  EXPECT_EQ(json::parse(published), schema);
}

TEST(Manifests, AllValidate) {
  for (const char* name : {"table1_p01", "table2_p03", "table3_p05", "table1b_binomial", "table5_ma", "iid_small"}) {
    EXPECT_NO_THROW(validate(load_config(std::string(SCANSTAT_CONFIG_DIR) + "/" + name + ".json"))) << name;
  }
}

}  // namespace
