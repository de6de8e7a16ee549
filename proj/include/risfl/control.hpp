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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "risfl/channel.hpp"
#include "risfl/error.hpp"
#include "risfl/matrix.hpp"

namespace risfl {

// |denominator| of the MMSE denoiser below which the cluster signal is
// treated as vanished.
inline constexpr double kVanishedSignal = 1e-15;

enum class DesignScheme { kUnbiased, kMmse };

struct AggregationDesign {
  std::vector<double> powers;     // p_k, 0 <= p_k <= P_k
  std::vector<double> denoisers;  // lambda_m > 0 (may be +inf: analog part discarded)
  DesignScheme scheme = DesignScheme::kUnbiased;
};

// Power control and denoisers that make the cluster estimate unbiased over
// the channel statistics under the co-phasing RIS configuration:
//   zeta_m   = min_k sqrt(P_k) beta(m,k) / (sigma_k sqrt(D))
//   p_k      = sigma_k^2 zeta_m^2 / beta(m,k)^2
//   lambda_m = pi N sqrt(|K_m|) zeta_m / 4
// Devices with sigma_k == 0 do not enter the minimum and get p_k = 0.
inline AggregationDesign unbiased_design(const Matrix<double>& beta, std::span<const double> sigmas,
                                         std::span<const double> max_power, std::size_t model_dim,
                                         std::size_t num_elements,
                                         const std::vector<std::vector<std::size_t>>& members) {
  const std::size_t M = members.size();
  const std::size_t K = sigmas.size();
  detail::require_dims(beta.rows() == M && beta.cols() == K, "beta must be M x K");
  detail::require_dims(max_power.size() == K, "max_power must have K entries");
  detail::require(model_dim > 0, "model_dim", "must be positive");
  const double sqrt_d = std::sqrt(static_cast<double>(model_dim));

  AggregationDesign design;
  design.scheme = DesignScheme::kUnbiased;
  design.powers.assign(K, 0.0);
  design.denoisers.assign(M, 0.0);
  for (std::size_t m = 0; m < M; ++m) {
    detail::require(!members[m].empty(), "cluster_of", "empty cluster " + std::to_string(m));
    double zeta = std::numeric_limits<double>::infinity();
    for (std::size_t k : members[m]) {
      if (sigmas[k] <= 0.0) continue;
      zeta = std::min(zeta, std::sqrt(max_power[k]) * beta(m, k) / (sigmas[k] * sqrt_d));
    }
    if (!std::isfinite(zeta))
      throw ConfigError("sigmas", "all-degenerate cluster " + std::to_string(m));
    for (std::size_t k : members[m]) {
      if (sigmas[k] <= 0.0) continue;
      const double p = sigmas[k] * sigmas[k] * zeta * zeta / (beta(m, k) * beta(m, k));
      design.powers[k] = std::min(p, max_power[k]);  // clips only rounding excess
    }
    design.denoisers[m] = std::numbers::pi * static_cast<double>(num_elements) *
                          std::sqrt(static_cast<double>(members[m].size())) * zeta / 4.0;
  }
  return design;
}

namespace detail {

struct MseTerms {
  double quadratic = 0.0;  // sum_i sum_{k in K_i} p_k hbar^2 sigma_k^2 + noise_var / 2
  double linear = 0.0;     // sum_{k in K_m} sqrt(p_k) hbar sigma_k^3
  double floor = 0.0;      // sum_{k in K_m} sigma_k^4 / |K_m|^2
  double size = 0.0;       // |K_m|
};

inline MseTerms mse_terms(std::span<const double> powers, std::span<const double> hbar_row,
                          std::span<const double> sigmas, double noise_var,
                          const std::vector<std::vector<std::size_t>>& members, std::size_t m) {
  require_dims(powers.size() == hbar_row.size() && sigmas.size() == hbar_row.size(),
               "powers, gains and sigmas must have K entries");
  require_dims(m < members.size(), "cluster index out of range");
  require(!members[m].empty(), "cluster_of", "empty cluster " + std::to_string(m));
  MseTerms t;
  t.size = static_cast<double>(members[m].size());
  for (std::size_t k = 0; k < hbar_row.size(); ++k)
    t.quadratic += powers[k] * hbar_row[k] * hbar_row[k] * sigmas[k] * sigmas[k];
  t.quadratic += noise_var / 2.0;
  for (std::size_t k : members[m]) {
    const double s = sigmas[k];
    t.linear += std::sqrt(powers[k]) * hbar_row[k] * s * s * s;
    t.floor += s * s * s * s;
  }
  t.floor /= t.size * t.size;
  return t;
}

}  // namespace detail

// Denoiser minimizing the conditional MSE of cluster m for fixed powers:
//   lambda* = |K_m| (sum_i sum_{k in K_i} p_k hbar_{m,k}^2 sigma_k^2 + noise_var/2)
//                  / (sum_{k in K_m} sqrt(p_k) hbar_{m,k} sigma_k^3).
// A negative denominator means the MSE grows with 1/lambda on (0, inf) and
// +inf is returned. Throws SignalVanished when the denominator is ~0.
inline double mmse_denoising(std::span<const double> powers, std::span<const double> hbar_row,
                             std::span<const double> sigmas, double noise_var,
                             const std::vector<std::vector<std::size_t>>& members, std::size_t m) {
  const auto t = detail::mse_terms(powers, hbar_row, sigmas, noise_var, members, m);
  if (std::abs(t.linear) < kVanishedSignal) throw SignalVanished(m);
  if (t.linear < 0.0) return std::numeric_limits<double>::infinity();
  return t.size * t.quadratic / t.linear;
}

// E||g_hat_m - g_m||^2 given the channel, for normalized gradients with
// i.i.d. unit-variance entries and real-part noise variance noise_var/2.
inline double conditional_mse(std::span<const double> powers, double lambda,
                              std::span<const double> hbar_row, std::span<const double> sigmas,
                              double noise_var, std::size_t model_dim,
                              const std::vector<std::vector<std::size_t>>& members, std::size_t m) {
  detail::require(lambda > 0.0, "lambda", "denoising factor must be > 0");
  const auto t = detail::mse_terms(powers, hbar_row, sigmas, noise_var, members, m);
  const double d = static_cast<double>(model_dim);
  const double inv = 1.0 / lambda;
  return d * (t.quadratic * inv * inv - 2.0 * t.linear / t.size * inv + t.floor);
}

// MMSE denoisers for the given powers. Clusters whose signal vanished keep
// the matching entry of fallback_denoisers.
inline AggregationDesign mmse_design(std::vector<double> powers, const Matrix<double>& hbar,
                                     std::span<const double> sigmas, double noise_var,
                                     const std::vector<std::vector<std::size_t>>& members,
                                     std::span<const double> fallback_denoisers) {
  detail::require_dims(hbar.rows() == members.size() && fallback_denoisers.size() == members.size(),
                       "one gain row and one fallback per cluster");
  AggregationDesign design;
  design.scheme = DesignScheme::kMmse;
  design.denoisers.resize(members.size());
  for (std::size_t m = 0; m < members.size(); ++m) {
    try {
      design.denoisers[m] = mmse_denoising(powers, hbar.row(m), sigmas, noise_var, members, m);
    } catch (const SignalVanished&) {
      design.denoisers[m] = fallback_denoisers[m];
    }
  }
  design.powers = std::move(powers);
  return design;
}

}  // namespace risfl
