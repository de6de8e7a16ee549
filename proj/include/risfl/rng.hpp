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
#include <cstdint>
#include <initializer_list>
#include <random>

namespace risfl {

using Rng = std::mt19937_64;

// Stream tags mixed into derived seeds so that independent consumers of the
// same (master seed, counter) never share a random stream.
enum class Purpose : std::uint64_t {
  kGeometry = 0x67656f6d,
  kChannel = 0x6368616e,
  kNoise = 0x6e6f6973,
  kPhases = 0x70686173,
  kGradients = 0x67726164,
  kTasks = 0x7461736b,
  kSolver = 0x736f6c76,
  kRound = 0x726f756e,
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based seed: a pure function of the master seed, a purpose tag and
// any number of counters (round, trial, sweep cell...).
inline std::uint64_t derive_seed(std::uint64_t master, Purpose purpose,
                                 std::initializer_list<std::uint64_t> counters = {}) noexcept {
  std::uint64_t h = splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(purpose)));
  for (std::uint64_t c : counters) h = splitmix64(h ^ splitmix64(c + 0x51ed270b27c1a3f5ULL));
  return h;
}

inline Rng make_rng(std::uint64_t master, Purpose purpose,
                    std::initializer_list<std::uint64_t> counters = {}) {
  return Rng(derive_seed(master, purpose, counters));
}

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_normal(Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace risfl
