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
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "risfl/error.hpp"
#include "risfl/matrix.hpp"
#include "risfl/phases.hpp"
#include "risfl/rng.hpp"
#include "risfl/sysmodel.hpp"

namespace risfl {

using cplx = std::complex<double>;

// Device-to-RIS distances are clamped below at this value (metres).
inline constexpr double kMinLinkDistance = 1.0;

// beta(i, k): cascaded large-scale amplitude of device k -> RIS i -> PS.
struct BetaMatrix : Matrix<double> {
  using Matrix<double>::Matrix;
};

// Cascaded power path loss (d1 d2)^-alpha expressed as an amplitude.
inline double cascaded_amplitude(double device_ris, double ris_ps, double alpha) {
  return std::pow(std::max(device_ris, kMinLinkDistance) * ris_ps, -alpha / 2.0);
}

inline BetaMatrix large_scale_coefficients(const Geometry& geom, double alpha) {
  const std::size_t num_ris = geom.ris_positions.size();
  const std::size_t num_devices = geom.device_positions.size();
  BetaMatrix beta(num_ris, num_devices);
  for (std::size_t i = 0; i < num_ris; ++i) {
    const double d_ps = distance(geom.ris_positions[i], geom.ps_position);
    for (std::size_t k = 0; k < num_devices; ++k) {
      const double d_dev = distance(geom.device_positions[k], geom.ris_positions[i]);
      if (!std::isfinite(d_ps) || !std::isfinite(d_dev))
        throw ConfigError("geometry", "non-finite distance");
      beta(i, k) = cascaded_amplitude(d_dev, d_ps, alpha);
    }
  }
  return beta;
}

// One block-fading realization of every small-scale channel.
//   ris_to_ps(i, m, n) = h_{p,i,m,n}: RIS i element n -> PS antenna m
//   device_to_ris(i, k, n) = h_{i,k,n}: device k -> RIS i element n
class ChannelSet {
 public:
  ChannelSet() = default;
  ChannelSet(std::size_t num_ris, std::size_t num_devices, std::size_t num_elements)
      : num_ris_(num_ris),
        num_devices_(num_devices),
        num_elements_(num_elements),
        ris_to_ps_(num_ris * num_ris * num_elements),
        device_to_ris_(num_ris * num_devices * num_elements) {}

  std::size_t num_ris() const noexcept { return num_ris_; }
  std::size_t num_antennas() const noexcept { return num_ris_; }
  std::size_t num_devices() const noexcept { return num_devices_; }
  std::size_t num_elements() const noexcept { return num_elements_; }

  cplx& ris_to_ps(std::size_t i, std::size_t m, std::size_t n) {
    return ris_to_ps_[(i * num_ris_ + m) * num_elements_ + n];
  }
  const cplx& ris_to_ps(std::size_t i, std::size_t m, std::size_t n) const {
    return ris_to_ps_[(i * num_ris_ + m) * num_elements_ + n];
  }
  cplx& device_to_ris(std::size_t i, std::size_t k, std::size_t n) {
    return device_to_ris_[(i * num_devices_ + k) * num_elements_ + n];
  }
  const cplx& device_to_ris(std::size_t i, std::size_t k, std::size_t n) const {
    return device_to_ris_[(i * num_devices_ + k) * num_elements_ + n];
  }

  // Column m of H_{p,i}, and h_{i,k}.
  std::span<const cplx> ris_to_ps_column(std::size_t i, std::size_t m) const {
    return {ris_to_ps_.data() + (i * num_ris_ + m) * num_elements_, num_elements_};
  }
  std::span<const cplx> device_to_ris_vector(std::size_t i, std::size_t k) const {
    return {device_to_ris_.data() + (i * num_devices_ + k) * num_elements_, num_elements_};
  }

  std::vector<cplx>& ris_to_ps_data() noexcept { return ris_to_ps_; }
  std::vector<cplx>& device_to_ris_data() noexcept { return device_to_ris_; }

  friend bool operator==(const ChannelSet&, const ChannelSet&) = default;

 private:
  std::size_t num_ris_ = 0;
  std::size_t num_devices_ = 0;
  std::size_t num_elements_ = 0;
  std::vector<cplx> ris_to_ps_;
  std::vector<cplx> device_to_ris_;
};

// i.i.d. CN(0, 1) entries, RIS-to-PS block first, in storage order.
inline ChannelSet sample_small_scale(std::size_t num_ris, std::size_t num_devices,
                                     std::size_t num_elements, std::uint64_t round_seed) {
  ChannelSet ch(num_ris, num_devices, num_elements);
  Rng rng = make_rng(round_seed, Purpose::kChannel);
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  for (auto& h : ch.ris_to_ps_data()) h = {n(rng), n(rng)};
  for (auto& h : ch.device_to_ris_data()) h = {n(rng), n(rng)};
  return ch;
}

inline ChannelSet sample_small_scale(const SystemConfig& cfg, std::uint64_t round_seed) {
  return sample_small_scale(cfg.num_clusters, cfg.num_devices, cfg.num_ris_elements, round_seed);
}

inline std::vector<cplx> phase_factors(const RisPhases& phases, std::size_t i) {
  std::vector<cplx> out(phases.num_elements());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = std::polar(1.0, phases(i, n));
  return out;
}

// h_{p,i,m}^H Theta_i h_{i,k} (complex, without large-scale fading).
inline cplx reflected_path(const ChannelSet& ch, const RisPhases& phases, std::size_t i,
                           std::size_t m, std::size_t k) {
  cplx acc{};
  for (std::size_t n = 0; n < ch.num_elements(); ++n)
    acc += std::conj(ch.ris_to_ps(i, m, n)) * std::polar(1.0, phases(i, n)) *
           ch.device_to_ris(i, k, n);
  return acc;
}

namespace detail {

inline void check_gain_dims(const ChannelSet& ch, const BetaMatrix& beta, const RisPhases& phases) {
  require_dims(beta.rows() == ch.num_ris() && beta.cols() == ch.num_devices(),
               "beta must be M x K");
  require_dims(phases.num_ris() == ch.num_ris() && phases.num_elements() == ch.num_elements(),
               "phases must be M x N");
}

}  // namespace detail

// hbar_{m,k} = sum_i beta_{i,k} Re{h_{p,i,m}^H Theta_i h_{i,k}}.
inline double cascaded_gain(const ChannelSet& ch, const BetaMatrix& beta, const RisPhases& phases,
                            std::size_t m, std::size_t k) {
  detail::check_gain_dims(ch, beta, phases);
  detail::require_dims(m < ch.num_antennas() && k < ch.num_devices(), "index out of range");
  double acc = 0.0;
  for (std::size_t i = 0; i < ch.num_ris(); ++i)
    acc += beta(i, k) * reflected_path(ch, phases, i, m, k).real();
  return acc;
}

// Complex composite channel a(m, k) = sum_i beta_{i,k} h_{p,i,m}^H Theta_i h_{i,k}
// for every antenna/device pair. Its real part is the hbar matrix.
inline Matrix<cplx> composite_channel(const ChannelSet& ch, const BetaMatrix& beta,
                                      const RisPhases& phases) {
  detail::check_gain_dims(ch, beta, phases);
  const std::size_t M = ch.num_ris();
  const std::size_t K = ch.num_devices();
  const std::size_t N = ch.num_elements();
  Matrix<cplx> a(M, K);
  std::vector<cplx> weighted(N);
  for (std::size_t i = 0; i < M; ++i) {
    const auto theta = phase_factors(phases, i);
    for (std::size_t m = 0; m < M; ++m) {
      const auto hp = ch.ris_to_ps_column(i, m);
      for (std::size_t n = 0; n < N; ++n) weighted[n] = std::conj(hp[n]) * theta[n];
      for (std::size_t k = 0; k < K; ++k) {
        const auto h = ch.device_to_ris_vector(i, k);
        cplx acc{};
        for (std::size_t n = 0; n < N; ++n) acc += weighted[n] * h[n];
        a(m, k) += beta(i, k) * acc;
      }
    }
  }
  return a;
}

inline Matrix<double> cascaded_gains(const ChannelSet& ch, const BetaMatrix& beta,
                                     const RisPhases& phases) {
  const Matrix<cplx> a = composite_channel(ch, beta, phases);
  Matrix<double> out(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.data().size(); ++j) out.data()[j] = a.data()[j].real();
  return out;
}

}  // namespace risfl
