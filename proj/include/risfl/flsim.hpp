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
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "risfl/aircomp.hpp"
#include "risfl/channel.hpp"
#include "risfl/error.hpp"
#include "risfl/matrix.hpp"
#include "risfl/rng.hpp"
#include "risfl/round.hpp"
#include "risfl/sysmodel.hpp"

namespace risfl {

// Linear-regression data of one device; the model's last coordinate is a bias.
struct DeviceDataset {
  Matrix<double> features;  // n x (D - 1)
  std::vector<double> targets;
  std::size_t owner = 0;

  std::size_t size() const noexcept { return targets.size(); }
};

struct ClusteredTasks {
  std::vector<DeviceDataset> datasets;            // one per device
  std::vector<std::vector<double>> ground_truth;  // w*_m per cluster
};

inline ClusteredTasks synth_clustered_tasks(std::size_t num_clusters, std::size_t num_devices,
                                            std::span<const std::size_t> cluster_of,
                                            std::size_t samples_per_device, std::size_t model_dim,
                                            double label_noise, std::uint64_t task_seed) {
  detail::require(model_dim >= 2, "model_dim", "must be >= 2 (features plus bias)");
  detail::require(samples_per_device >= 1, "samples_per_device", "must be >= 1");
  detail::require_dims(cluster_of.size() == num_devices, "cluster_of must have K entries");
  Rng rng = make_rng(task_seed, Purpose::kTasks);
  std::normal_distribution<double> normal(0.0, 1.0);
  ClusteredTasks tasks;
  tasks.ground_truth.assign(num_clusters, std::vector<double>(model_dim));
  for (auto& w : tasks.ground_truth)
    for (double& v : w) v = normal(rng);
  for (std::size_t k = 0; k < num_devices; ++k) {
    detail::require_dims(cluster_of[k] < num_clusters, "cluster index out of range");
    const auto& w = tasks.ground_truth[cluster_of[k]];
    DeviceDataset ds{Matrix<double>(samples_per_device, model_dim - 1),
                     std::vector<double>(samples_per_device), k};
    for (std::size_t s = 0; s < samples_per_device; ++s) {
      double y = w[model_dim - 1];
      for (std::size_t j = 0; j + 1 < model_dim; ++j) {
        ds.features(s, j) = normal(rng);
        y += ds.features(s, j) * w[j];
      }
      ds.targets[s] = y + label_noise * normal(rng);
    }
    tasks.datasets.push_back(std::move(ds));
  }
  return tasks;
}

namespace detail {

inline double residual(std::span<const double> w, const DeviceDataset& ds, std::size_t s) {
  const std::size_t f = ds.features.cols();
  double pred = w[f];
  for (std::size_t j = 0; j < f; ++j) pred += ds.features(s, j) * w[j];
  return ds.targets[s] - pred;
}

}  // namespace detail

// F_k(w) = (1 / 2n) sum_s (y_s - [x_s; 1]^T w)^2
inline double device_loss(std::span<const double> w, const DeviceDataset& ds) {
  detail::require_dims(w.size() == ds.features.cols() + 1, "model/feature dimension mismatch");
  double acc = 0.0;
  for (std::size_t s = 0; s < ds.size(); ++s) {
    const double r = detail::residual(w, ds, s);
    acc += r * r;
  }
  return acc / (2.0 * static_cast<double>(ds.size()));
}

inline std::vector<double> local_gradient(std::span<const double> w, const DeviceDataset& ds) {
  detail::require_dims(w.size() == ds.features.cols() + 1, "model/feature dimension mismatch");
  const std::size_t f = ds.features.cols();
  std::vector<double> g(w.size(), 0.0);
  for (std::size_t s = 0; s < ds.size(); ++s) {
    const double r = detail::residual(w, ds, s);
    for (std::size_t j = 0; j < f; ++j) g[j] -= r * ds.features(s, j);
    g[f] -= r;
  }
  for (double& v : g) v /= static_cast<double>(ds.size());
  return g;
}

// Cluster objective: average device loss over the members.
inline double cluster_loss(std::span<const double> w, std::span<const DeviceDataset> datasets,
                           std::span<const std::size_t> members) {
  double acc = 0.0;
  for (std::size_t k : members) acc += device_loss(w, datasets[k]);
  return acc / static_cast<double>(members.size());
}

inline std::vector<double> sgd_step(std::span<const double> w, std::span<const double> g, double eta) {
  detail::require(eta > 0.0, "eta", "learning rate must be > 0");
  detail::require_dims(w.size() == g.size(), "model/gradient dimension mismatch");
  std::vector<double> out(w.size());
  for (std::size_t d = 0; d < w.size(); ++d) out[d] = w[d] - eta * g[d];
  return out;
}

struct PersonalizedModels {
  std::vector<std::vector<double>> w;  // one D-vector per cluster
  std::size_t round = 0;
};

using LearningRate = std::function<double(std::size_t cluster, std::size_t round)>;

inline LearningRate constant_rate(double eta) {
  return [eta](std::size_t, std::size_t) { return eta; };
}

struct TrainingOptions {
  std::size_t rounds = 100;
  LearningRate eta = constant_rate(0.05);
  std::uint64_t seed = 0;
};

struct TrainingHistory {
  std::vector<double> initial_loss;  // M, before the first round
  Matrix<double> loss;               // T x M, after each round's update
  std::vector<double> nmse;          // T
  std::string scheme;
  std::uint64_t seed = 0;
  PersonalizedModels final_models;

  double final_summed_loss() const {
    double s = 0.0;
    if (loss.rows() == 0) {
      for (double v : initial_loss) s += v;
      return s;
    }
    for (double v : loss.row(loss.rows() - 1)) s += v;
    return s;
  }
};

// Personalized over-the-air FL: every round each device computes its local
// gradient on its cluster's model, the PS aggregates per cluster through the
// simulated RIS-assisted uplink and applies one SGD step per cluster. The
// broadcast of the models is error-free. `global` trains one shared model on
// the average of all local gradients.
inline TrainingHistory run_training(const SystemConfig& cfg, const Geometry& geom,
                                    std::span<const DeviceDataset> datasets, const Scheme& scheme,
                                    const TrainingOptions& opts) {
  validate_config(cfg);
  detail::require_dims(datasets.size() == cfg.num_devices, "one dataset per device");
  detail::require_dims(geom.ris_positions.size() == cfg.num_clusters &&
                           geom.device_positions.size() == cfg.num_devices,
                       "geometry does not match the configuration");
  const std::size_t M = cfg.num_clusters;
  const std::size_t K = cfg.num_devices;
  const std::size_t D = cfg.model_dim;
  const auto members = cluster_members(cfg);
  const BetaMatrix beta = large_scale_coefficients(geom, cfg.pathloss_exponent);
  const bool global = scheme.kind == SchemeKind::kGlobal;
  std::vector<std::size_t> everyone(K);
  for (std::size_t k = 0; k < K; ++k) everyone[k] = k;

  TrainingHistory hist;
  hist.scheme = scheme.name();
  hist.seed = opts.seed;
  hist.loss = Matrix<double>(opts.rounds, M);
  hist.nmse.reserve(opts.rounds);

  PersonalizedModels models{std::vector<std::vector<double>>(M, std::vector<double>(D, 0.0)), 0};
  for (std::size_t m = 0; m < M; ++m) hist.initial_loss.push_back(cluster_loss(models.w[m], datasets, members[m]));

  std::vector<std::vector<double>> local(K);
  for (std::size_t t = 0; t < opts.rounds; ++t) {
    for (std::size_t k = 0; k < K; ++k) local[k] = local_gradient(models.w[cfg.cluster_of[k]], datasets[k]);

    std::vector<std::vector<double>> truth;
    for (std::size_t m = 0; m < M; ++m) truth.push_back(cluster_average(local, members[m]));

    std::vector<std::vector<double>> estimates;
    if (global) {
      estimates.assign(M, cluster_average(local, everyone));
    } else {
      estimates = aggregate_round(cfg, beta, members, scheme, local,
                                  derive_seed(opts.seed, Purpose::kRound, {t}))
                      .estimates;
    }
    hist.nmse.push_back(global ? 0.0 : normalized_mse(estimates, truth));

    for (std::size_t m = 0; m < M; ++m) {
      models.w[m] = sgd_step(models.w[m], estimates[m], opts.eta(m, t));
      for (double v : models.w[m])
        if (!std::isfinite(v))
          throw Error("run_training: non-finite model for cluster " + std::to_string(m) + " at round " +
                      std::to_string(t) + " (scheme " + hist.scheme + ")");
      hist.loss(t, m) = cluster_loss(models.w[m], datasets, members[m]);
    }
    models.round = t + 1;
  }
  hist.final_models = std::move(models);
  return hist;
}

}  // namespace risfl
