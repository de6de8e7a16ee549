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

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "risfl/error.hpp"
#include "risfl/rng.hpp"

namespace risfl {

// Dimensions, cluster partition, power budgets and propagation constants of
// one personalized over-the-air FL deployment.
struct SystemConfig {
  std::size_t num_devices = 0;       // K
  std::size_t num_clusters = 0;      // M; also the number of RISs and PS antennas
  std::size_t num_ris_elements = 0;  // N
  std::size_t model_dim = 0;         // D
  std::vector<std::size_t> cluster_of;  // device -> cluster, 0-based
  std::vector<double> max_power;        // P_k in watts
  double noise_var = 0.0;               // sigma^2 per complex noise entry
  double pathloss_exponent = 2.2;
  double ps_ris_distance = 200.0;
  double device_disk_radius = 300.0;
  std::uint64_t master_seed = 0;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

// Throws ConfigError naming the first violated invariant; returns cfg otherwise.
inline const SystemConfig& validate_config(const SystemConfig& cfg) {
  using detail::require;
  require(cfg.num_devices > 0, "num_devices", "must be positive");
  require(cfg.num_clusters > 0, "num_clusters", "must be positive");
  require(cfg.num_ris_elements > 0, "num_ris_elements", "must be positive");
  require(cfg.model_dim > 0, "model_dim", "must be positive");
  require(cfg.num_clusters < cfg.num_devices, "num_clusters", "M must be < K");
  require(cfg.cluster_of.size() == cfg.num_devices, "cluster_of",
          "expected " + std::to_string(cfg.num_devices) + " entries");
  std::vector<std::size_t> sizes(cfg.num_clusters, 0);
  for (std::size_t k = 0; k < cfg.num_devices; ++k) {
    require(cfg.cluster_of[k] < cfg.num_clusters, "cluster_of",
            "device " + std::to_string(k) + " maps outside [0, M)");
    ++sizes[cfg.cluster_of[k]];
  }
  for (std::size_t m = 0; m < cfg.num_clusters; ++m)
    require(sizes[m] > 0, "cluster_of", "empty cluster " + std::to_string(m));
  require(cfg.max_power.size() == cfg.num_devices, "max_power",
          "expected " + std::to_string(cfg.num_devices) + " entries");
  for (double p : cfg.max_power)
    require(std::isfinite(p) && p > 0.0, "max_power", "non-positive power");
  require(std::isfinite(cfg.noise_var) && cfg.noise_var >= 0.0, "noise_var", "must be >= 0");
  require(std::isfinite(cfg.pathloss_exponent) && cfg.pathloss_exponent > 0.0,
          "pathloss_exponent", "must be positive");
  require(std::isfinite(cfg.ps_ris_distance) && cfg.ps_ris_distance > 0.0, "ps_ris_distance",
          "must be positive");
  require(std::isfinite(cfg.device_disk_radius) && cfg.device_disk_radius > 0.0,
          "device_disk_radius", "must be positive");
  return cfg;
}

// Members of each cluster in ascending device order.
inline std::vector<std::vector<std::size_t>> cluster_members(std::span<const std::size_t> cluster_of,
                                                             std::size_t num_clusters) {
  std::vector<std::vector<std::size_t>> members(num_clusters);
  for (std::size_t k = 0; k < cluster_of.size(); ++k) {
    detail::require_dims(cluster_of[k] < num_clusters, "cluster index out of range");
    members[cluster_of[k]].push_back(k);
  }
  return members;
}

inline std::vector<std::vector<std::size_t>> cluster_members(const SystemConfig& cfg) {
  return cluster_members(cfg.cluster_of, cfg.num_clusters);
}

// Round-robin assignment: device k -> cluster k mod M.
inline std::vector<std::size_t> round_robin_clusters(std::size_t num_devices, std::size_t num_clusters) {
  std::vector<std::size_t> out(num_devices);
  for (std::size_t k = 0; k < num_devices; ++k) out[k] = k % num_clusters;
  return out;
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Geometry {
  Point2 ps_position;
  std::vector<Point2> ris_positions;     // one per cluster
  std::vector<Point2> device_positions;  // one per device
  friend bool operator==(const Geometry&, const Geometry&) = default;
};

// PS at the origin, RIS m at bearing 2*pi*m/M on the circle of radius
// ps_ris_distance, and each device area-uniform on the disk around its RIS.
inline Geometry place_geometry(const SystemConfig& cfg, std::uint64_t seed) {
  Geometry g;
  const double two_pi = 2.0 * std::numbers::pi;
  g.ris_positions.reserve(cfg.num_clusters);
  for (std::size_t m = 0; m < cfg.num_clusters; ++m) {
    const double angle = two_pi * static_cast<double>(m) / static_cast<double>(cfg.num_clusters);
    g.ris_positions.push_back({cfg.ps_ris_distance * std::cos(angle),
                               cfg.ps_ris_distance * std::sin(angle)});
  }
  Rng rng = make_rng(seed, Purpose::kGeometry);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  g.device_positions.reserve(cfg.num_devices);
  for (std::size_t k = 0; k < cfg.num_devices; ++k) {
    const double r = cfg.device_disk_radius * std::sqrt(unit(rng));
    const double phi = two_pi * unit(rng);
    const Point2 c = g.ris_positions[cfg.cluster_of[k]];
    g.device_positions.push_back({c.x + r * std::cos(phi), c.y + r * std::sin(phi)});
  }
  return g;
}

inline void to_json(nlohmann::json& j, const SystemConfig& c) {
  j = nlohmann::json{{"num_devices", c.num_devices},
                     {"num_clusters", c.num_clusters},
                     {"num_ris_elements", c.num_ris_elements},
                     {"model_dim", c.model_dim},
                     {"cluster_of", c.cluster_of},
                     {"max_power", c.max_power},
                     {"noise_var", c.noise_var},
                     {"pathloss_exponent", c.pathloss_exponent},
                     {"ps_ris_distance", c.ps_ris_distance},
                     {"device_disk_radius", c.device_disk_radius},
                     {"master_seed", c.master_seed}};
}

// max_power may also be given as one number applied to every device, and
// cluster_of may be omitted for a round-robin partition.
inline void from_json(const nlohmann::json& j, SystemConfig& c) {
  j.at("num_devices").get_to(c.num_devices);
  j.at("num_clusters").get_to(c.num_clusters);
  j.at("num_ris_elements").get_to(c.num_ris_elements);
  j.at("model_dim").get_to(c.model_dim);
  if (j.contains("cluster_of"))
    j.at("cluster_of").get_to(c.cluster_of);
  else
    c.cluster_of = round_robin_clusters(c.num_devices, c.num_clusters);
  const auto& p = j.at("max_power");
  if (p.is_number())
    c.max_power.assign(c.num_devices, p.get<double>());
  else
    p.get_to(c.max_power);
  j.at("noise_var").get_to(c.noise_var);
  c.pathloss_exponent = j.value("pathloss_exponent", 2.2);
  c.ps_ris_distance = j.value("ps_ris_distance", 200.0);
  c.device_disk_radius = j.value("device_disk_radius", 300.0);
  c.master_seed = j.value("master_seed", std::uint64_t{0});
}

}  // namespace risfl
