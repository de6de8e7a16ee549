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
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "risfl/channel.hpp"
#include "risfl/error.hpp"
#include "risfl/matrix.hpp"
#include "risfl/phases.hpp"
#include "risfl/rng.hpp"

namespace risfl {

// Zero-mean, unit-population-variance version of a local gradient together
// with the statistics needed to undo the normalization. A constant gradient
// has std == 0 and an all-zero g_bar.
struct NormalizedGradient {
  std::vector<double> g_bar;
  double mean = 0.0;
  double std = 0.0;

  bool degenerate() const noexcept { return std == 0.0; }
};

inline NormalizedGradient normalize_gradient(std::span<const double> g, double eps = 1e-12) {
  detail::require(!g.empty(), "gradient", "dimension must be >= 1");
  for (double v : g) detail::require(std::isfinite(v), "gradient", "non-finite entry");
  const double d = static_cast<double>(g.size());
  NormalizedGradient out;
  out.mean = std::accumulate(g.begin(), g.end(), 0.0) / d;
  double ss = 0.0;
  for (double v : g) ss += (v - out.mean) * (v - out.mean);
  const double sd = std::sqrt(ss / d);
  out.g_bar.assign(g.size(), 0.0);
  if (sd < eps) return out;
  out.std = sd;
  for (std::size_t j = 0; j < g.size(); ++j) out.g_bar[j] = (g[j] - out.mean) / sd;
  return out;
}

inline std::vector<double> denormalize(const NormalizedGradient& ng) {
  std::vector<double> g(ng.g_bar.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = ng.std * ng.g_bar[j] + ng.mean;
  return g;
}

// Y: M x D, row m holds the signal of PS antenna m (conjugated y_m). Only its
// real part is consumed by the estimator.
struct ReceivedMatrix : Matrix<cplx> {
  using Matrix<cplx>::Matrix;
};

// L(m, k) = ell_{m,k}: coupling of device k's normalized gradient into cluster m's estimate.
struct GainMatrix : Matrix<double> {
  using Matrix<double>::Matrix;
};

namespace detail {

inline void check_powers(std::span<const double> powers, std::size_t num_devices) {
  require_dims(powers.size() == num_devices, "powers must have K entries");
  for (double p : powers) require(std::isfinite(p) && p >= 0.0, "powers", "negative power");
}

}  // namespace detail

// Superposed analog uplink: Y = sum_k sqrt(p_k) a(:, k) g_bar_k^T + Z with
// a(m, k) = sum_i beta_{i,k} h_{p,i,m}^H Theta_i h_{i,k} and Z ~ CN(0, noise_var).
inline ReceivedMatrix uplink(const Matrix<cplx>& composite, std::span<const double> powers,
                             std::span<const NormalizedGradient> grads, double noise_var,
                             std::uint64_t noise_seed) {
  const std::size_t M = composite.rows();
  const std::size_t K = composite.cols();
  detail::check_powers(powers, K);
  detail::require_dims(grads.size() == K, "need one gradient per device");
  detail::require(std::isfinite(noise_var) && noise_var >= 0.0, "noise_var", "must be >= 0");
  const std::size_t D = K > 0 ? grads[0].g_bar.size() : 0;
  for (const auto& g : grads) detail::require_dims(g.g_bar.size() == D, "gradient dimension mismatch");

  ReceivedMatrix y(M, D);
  for (std::size_t k = 0; k < K; ++k) {
    if (powers[k] == 0.0 || grads[k].degenerate()) continue;
    const double amp = std::sqrt(powers[k]);
    for (std::size_t m = 0; m < M; ++m) {
      const cplx coef = amp * composite(m, k);
      auto row = y.row(m);
      for (std::size_t d = 0; d < D; ++d) row[d] += coef * grads[k].g_bar[d];
    }
  }
  if (noise_var > 0.0) {
    Rng rng = make_rng(noise_seed, Purpose::kNoise);
    std::normal_distribution<double> n(0.0, std::sqrt(noise_var / 2.0));
    for (auto& v : y.data()) v += cplx(n(rng), n(rng));
  }
  return y;
}

inline ReceivedMatrix uplink(const ChannelSet& ch, const BetaMatrix& beta, const RisPhases& phases,
                             std::span<const double> powers,
                             std::span<const NormalizedGradient> grads, double noise_var,
                             std::uint64_t noise_seed) {
  return uplink(composite_channel(ch, beta, phases), powers, grads, noise_var, noise_seed);
}

inline GainMatrix effective_gains(const Matrix<double>& hbar, std::span<const double> powers,
                                  std::span<const double> denoisers) {
  detail::check_powers(powers, hbar.cols());
  detail::require_dims(denoisers.size() == hbar.rows(), "need one denoiser per cluster");
  for (double l : denoisers) detail::require(l > 0.0, "lambda", "denoising factor must be > 0");
  GainMatrix out(hbar.rows(), hbar.cols());
  for (std::size_t m = 0; m < hbar.rows(); ++m)
    for (std::size_t k = 0; k < hbar.cols(); ++k)
      out(m, k) = std::sqrt(powers[k]) / denoisers[m] * hbar(m, k);
  return out;
}

inline GainMatrix effective_gains(const ChannelSet& ch, const BetaMatrix& beta,
                                  const RisPhases& phases, std::span<const double> powers,
                                  std::span<const double> denoisers) {
  return effective_gains(cascaded_gains(ch, beta, phases), powers, denoisers);
}

// g_hat_m = Re{y_m} / lambda_m + mean(u_k over the cluster) * 1.
// lambda_m = +inf is accepted and discards the analog part.
inline std::vector<double> estimate_cluster_gradient(std::span<const cplx> y_m, double lambda,
                                                     std::span<const double> cluster_means,
                                                     std::size_t cluster_size) {
  detail::require(lambda > 0.0, "lambda", "denoising factor must be > 0");
  detail::require(cluster_size > 0, "cluster_size", "empty cluster");
  detail::require_dims(cluster_means.size() == cluster_size, "one mean per cluster member");
  const double mean_term =
      std::accumulate(cluster_means.begin(), cluster_means.end(), 0.0) /
      static_cast<double>(cluster_size);
  const double inv = 1.0 / lambda;
  std::vector<double> g(y_m.size());
  for (std::size_t d = 0; d < g.size(); ++d) g[d] = y_m[d].real() * inv + mean_term;
  return g;
}

// Every cluster's estimate from one received block.
inline std::vector<std::vector<double>> estimate_all(
    const ReceivedMatrix& y, std::span<const double> denoisers,
    std::span<const NormalizedGradient> grads,
    const std::vector<std::vector<std::size_t>>& members) {
  detail::require_dims(denoisers.size() == y.rows() && members.size() == y.rows(),
                       "one denoiser and one cluster per antenna");
  std::vector<std::vector<double>> out;
  out.reserve(y.rows());
  std::vector<double> means;
  for (std::size_t m = 0; m < y.rows(); ++m) {
    means.clear();
    for (std::size_t k : members[m]) means.push_back(grads[k].mean);
    out.push_back(estimate_cluster_gradient(y.row(m), denoisers[m], means, means.size()));
  }
  return out;
}

// Plain average of the cluster members' local gradients.
inline std::vector<double> cluster_average(std::span<const std::vector<double>> local,
                                           std::span<const std::size_t> members) {
  detail::require(!members.empty(), "cluster", "empty cluster");
  std::vector<double> g(local[members[0]].size(), 0.0);
  for (std::size_t k : members)
    for (std::size_t d = 0; d < g.size(); ++d) g[d] += local[k][d];
  for (double& v : g) v /= static_cast<double>(members.size());
  return g;
}

}  // namespace risfl
