// Copyright 2026 The risfl Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "risfl/sysmodel.hpp"

namespace risfl {
namespace {

SystemConfig minimal_config() {
  SystemConfig cfg;
  cfg.num_devices = 4;
  cfg.num_clusters = 2;
  cfg.num_ris_elements = 8;
  cfg.model_dim = 4;
  cfg.cluster_of = {0, 0, 1, 1};
  cfg.max_power = {1, 1, 1, 1};
  cfg.noise_var = 1e-13;
  return cfg;
}

std::string rejected_field(const SystemConfig& cfg) {
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    return e.field() + " | " + e.what();
  }
  return "";
}

TEST(SystemConfigTest, AcceptsMinimalConfig) {
  const SystemConfig cfg = minimal_config();
  EXPECT_EQ(validate_config(cfg), cfg);
}

TEST(SystemConfigTest, RejectsEmptyCluster) {
  SystemConfig cfg = minimal_config();
  cfg.num_clusters = 3;
  cfg.cluster_of = {0, 0, 1, 1};
  EXPECT_NE(rejected_field(cfg).find("empty cluster"), std::string::npos);

  cfg.num_clusters = 4;
  EXPECT_NE(rejected_field(cfg).find("M must be < K"), std::string::npos);
}

TEST(SystemConfigTest, RejectsClustersNotBelowDevices) {
  SystemConfig cfg = minimal_config();
  cfg.num_clusters = 4;
  cfg.cluster_of = {0, 1, 2, 3};
  EXPECT_NE(rejected_field(cfg).find("M must be < K"), std::string::npos);
}

TEST(SystemConfigTest, RejectsBadPowersAndNoise) {
  SystemConfig cfg = minimal_config();
  cfg.max_power[2] = 0.0;
  EXPECT_EQ(rejected_field(cfg).rfind("max_power", 0), 0u);
  cfg = minimal_config();
  cfg.noise_var = -1.0;
  EXPECT_EQ(rejected_field(cfg).rfind("noise_var", 0), 0u);
  cfg = minimal_config();
  cfg.cluster_of[1] = 7;
  EXPECT_EQ(rejected_field(cfg).rfind("cluster_of", 0), 0u);
  cfg = minimal_config();
  cfg.pathloss_exponent = 0.0;
  EXPECT_EQ(rejected_field(cfg).rfind("pathloss_exponent", 0), 0u);
}

TEST(SystemConfigTest, JsonUsesDocumentedFieldNames) {
  const SystemConfig cfg = minimal_config();
  const nlohmann::json j = cfg;
  for (const char* key : {"num_devices", "num_clusters", "num_ris_elements", "model_dim", "cluster_of",
                          "max_power", "noise_var", "pathloss_exponent", "ps_ris_distance",
                          "device_disk_radius", "master_seed"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("cluster_of"), nlohmann::json({0, 0, 1, 1}));
  EXPECT_EQ(j.get<SystemConfig>(), cfg);
}

TEST(SystemConfigTest, JsonScalarPowerBroadcasts) {
  const auto j = nlohmann::json::parse(R"({"num_devices": 3, "num_clusters": 2, "num_ris_elements": 4,
      "model_dim": 2, "max_power": 0.5, "noise_var": 0})");
  const auto cfg = j.get<SystemConfig>();
  EXPECT_EQ(cfg.max_power, std::vector<double>(3, 0.5));
  EXPECT_EQ(cfg.cluster_of, (std::vector<std::size_t>{0, 1, 0}));
}

TEST(GeometryTest, SingleRisSitsOnPositiveXAxis) {
  SystemConfig cfg = minimal_config();
  cfg.num_clusters = 1;
  cfg.cluster_of = {0, 0, 0, 0};
  const Geometry g = place_geometry(cfg, 3);
  ASSERT_EQ(g.ris_positions.size(), 1u);
  EXPECT_NEAR(g.ris_positions[0].x, 200.0, 1e-12);
  EXPECT_NEAR(g.ris_positions[0].y, 0.0, 1e-12);
  for (const auto& p : g.device_positions) EXPECT_LE(distance(p, g.ris_positions[0]), 300.0);
}

TEST(GeometryTest, RisBearingsAreEquallySpaced) {
  SystemConfig cfg = minimal_config();
  cfg.num_devices = 8;
  cfg.num_clusters = 4;
  cfg.cluster_of = round_robin_clusters(8, 4);
  cfg.max_power.assign(8, 1.0);
  const Geometry g = place_geometry(cfg, 1);
  for (std::size_t m = 0; m < 4; ++m) {
    const double angle = std::atan2(g.ris_positions[m].y, g.ris_positions[m].x);
    const double expected = std::numbers::pi / 2.0 * static_cast<double>(m);
    EXPECT_NEAR(std::remainder(angle - expected, 2.0 * std::numbers::pi), 0.0, 1e-12);
    EXPECT_NEAR(distance(g.ris_positions[m], g.ps_position), 200.0, 1e-9);
  }
}

TEST(GeometryTest, DeterministicInSeed) {
  const SystemConfig cfg = minimal_config();
  EXPECT_EQ(place_geometry(cfg, 42), place_geometry(cfg, 42));
  EXPECT_NE(place_geometry(cfg, 42), place_geometry(cfg, 43));
}

TEST(GeometryTest, DevicesStayInOwnDisk) {
  SystemConfig cfg = minimal_config();
  cfg.num_devices = 200;
  cfg.num_clusters = 5;
  cfg.cluster_of = round_robin_clusters(200, 5);
  cfg.max_power.assign(200, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Geometry g = place_geometry(cfg, seed);
    for (std::size_t k = 0; k < cfg.num_devices; ++k)
      EXPECT_LE(distance(g.device_positions[k], g.ris_positions[cfg.cluster_of[k]]), cfg.device_disk_radius);
  }
}

TEST(GeometryTest, RadialDistributionIsAreaUniform) {
  SystemConfig cfg = minimal_config();
  cfg.num_devices = 10000;
  cfg.num_clusters = 1;
  cfg.cluster_of.assign(cfg.num_devices, 0);
  cfg.max_power.assign(cfg.num_devices, 1.0);
  const Geometry g = place_geometry(cfg, 11);
  std::vector<double> r;
  for (const auto& p : g.device_positions) r.push_back(distance(p, g.ris_positions[0]) / cfg.device_disk_radius);
  std::sort(r.begin(), r.end());
  // Kolmogorov-Smirnov distance to F(r) = r^2.
  double ks = 0.0;
  const double n = static_cast<double>(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double f = r[i] * r[i];
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  EXPECT_LT(ks, 0.02);
}

}  // namespace
}  // namespace risfl
