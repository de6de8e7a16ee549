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
#include <numbers>

#include "risfl/error.hpp"
#include "risfl/matrix.hpp"

namespace risfl {

// Phase shifts theta(i, n) of RIS i, element n, each in [0, 2*pi).
class RisPhases {
 public:
  RisPhases() = default;
  RisPhases(std::size_t num_ris, std::size_t num_elements) : theta_(num_ris, num_elements, 0.0) {}

  explicit RisPhases(Matrix<double> theta) : theta_(std::move(theta)) {
    for (double t : theta_.data())
      detail::require(t >= 0.0 && t < 2.0 * std::numbers::pi, "theta", "phase outside [0, 2pi)");
  }

  std::size_t num_ris() const noexcept { return theta_.rows(); }
  std::size_t num_elements() const noexcept { return theta_.cols(); }

  double operator()(std::size_t i, std::size_t n) const { return theta_(i, n); }
  const Matrix<double>& matrix() const noexcept { return theta_; }

  friend bool operator==(const RisPhases&, const RisPhases&) = default;

 private:
  Matrix<double> theta_;
};

// Reduces any finite angle into [0, 2*pi).
inline double wrap_phase(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(angle, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

}  // namespace risfl
