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
#include <numbers>
#include <vector>

#include "risfl/channel.hpp"
#include "risfl/error.hpp"
#include "risfl/phases.hpp"
#include "risfl/rng.hpp"

namespace risfl {

// Below this magnitude the summed device channel has no usable angle and 0 is used.
inline constexpr double kZeroChannelMagnitude = 1e-15;

// Interference-eliminating configuration: RIS m co-phases its PS link on
// antenna m with the sum of its own cluster's device channels,
//   theta(m, n) = -arg(conj(h_{p,m,m,n})) + arg(sum_{k in cluster m} conj(h_{m,k,n})).
inline RisPhases align_cluster_phases(const ChannelSet& ch,
                                      const std::vector<std::vector<std::size_t>>& members) {
  const std::size_t M = ch.num_ris();
  const std::size_t N = ch.num_elements();
  detail::require_dims(members.size() == M, "cluster map must have M clusters");
  Matrix<double> theta(M, N);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t n = 0; n < N; ++n) {
      cplx sum{};
      for (std::size_t k : members[m]) {
        detail::require_dims(k < ch.num_devices(), "device index out of range");
        sum += std::conj(ch.device_to_ris(m, k, n));
      }
      const double sum_angle = std::abs(sum) < kZeroChannelMagnitude ? 0.0 : std::arg(sum);
      theta(m, n) = wrap_phase(-std::arg(std::conj(ch.ris_to_ps(m, m, n))) + sum_angle);
    }
  }
  return RisPhases(std::move(theta));
}

enum class BaselineMode { kRandom, kZero };

inline RisPhases baseline_phases(BaselineMode mode, std::size_t num_ris, std::size_t num_elements,
                                 std::uint64_t seed) {
  Matrix<double> theta(num_ris, num_elements, 0.0);
  if (mode == BaselineMode::kRandom) {
    Rng rng = make_rng(seed, Purpose::kPhases);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    for (double& t : theta.data()) t = wrap_phase(u(rng));
  }
  return RisPhases(std::move(theta));
}

// Nearest point of the 2^bits uniform grid; exact ties go to the lower point.
inline double quantize_phase(double theta, unsigned bits) {
  detail::require(bits >= 1 && bits < 32, "bits", "must be in [1, 31]");
  const double levels = std::ldexp(1.0, static_cast<int>(bits));
  const double step = 2.0 * std::numbers::pi / levels;
  const double pos = theta / step;
  double lower = std::floor(pos);
  if (pos - lower > 0.5) lower += 1.0;
  if (lower >= levels) lower -= levels;
  return lower * step;
}

inline RisPhases corrupt_phases(const RisPhases& phases, unsigned bits) {
  Matrix<double> theta = phases.matrix();
  for (double& t : theta.data()) t = quantize_phase(t, bits);
  return RisPhases(std::move(theta));
}

}  // namespace risfl
