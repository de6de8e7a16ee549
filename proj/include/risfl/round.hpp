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

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "risfl/aircomp.hpp"
#include "risfl/channel.hpp"
#include "risfl/control.hpp"
#include "risfl/error.hpp"
#include "risfl/powopt.hpp"
#include "risfl/ris.hpp"
#include "risfl/sysmodel.hpp"

namespace risfl {

enum class SchemeKind {
  kIdeal,        // error-free cluster average, no channel
  kUnbiased,     // co-phased RIS + unbiased powers/denoisers
  kMmse,         // co-phased RIS + unbiased powers + MMSE denoisers
  kMmsePowopt,   // co-phased RIS + ratio-problem powers + MMSE denoisers
  kRandomPhase,  // random RIS phases + unbiased powers + MMSE denoisers
  kGlobal,       // training ablation: one shared model, error-free average over all devices
};

// An aggregation scheme, optionally with RIS phases quantized to phase_bits.
struct Scheme {
  SchemeKind kind = SchemeKind::kIdeal;
  unsigned phase_bits = 0;  // 0: continuous phases

  friend bool operator==(const Scheme&, const Scheme&) = default;

  std::string name() const {
    std::string base;
    switch (kind) {
      case SchemeKind::kIdeal: base = "ideal"; break;
      case SchemeKind::kUnbiased: base = "unbiased"; break;
      case SchemeKind::kMmse: base = "mmse"; break;
      case SchemeKind::kMmsePowopt: base = "mmse+powopt"; break;
      case SchemeKind::kRandomPhase: base = "random-phase"; break;
      case SchemeKind::kGlobal: base = "global"; break;
    }
    if (phase_bits > 0) base += "-q" + std::to_string(phase_bits);
    return base;
  }
};

// "unbiased", "mmse", "mmse+powopt", "random-phase", "ideal", "global", with
// an optional "-q<bits>" suffix for quantized phases (e.g. "mmse-q1").
inline Scheme parse_scheme(std::string_view text) {
  Scheme s;
  std::string_view base = text;
  if (auto pos = text.rfind("-q"); pos != std::string_view::npos && pos + 2 < text.size()) {
    const std::string digits(text.substr(pos + 2));
    if (digits.find_first_not_of("0123456789") == std::string::npos) {
      s.phase_bits = static_cast<unsigned>(std::stoul(digits));
      detail::require(s.phase_bits >= 1 && s.phase_bits < 32, "scheme", "bad phase bits in '" + std::string(text) + "'");
      base = text.substr(0, pos);
    }
  }
  if (base == "ideal") s.kind = SchemeKind::kIdeal;
  else if (base == "unbiased") s.kind = SchemeKind::kUnbiased;
  else if (base == "mmse") s.kind = SchemeKind::kMmse;
  else if (base == "mmse+powopt") s.kind = SchemeKind::kMmsePowopt;
  else if (base == "random-phase") s.kind = SchemeKind::kRandomPhase;
  else if (base == "global") s.kind = SchemeKind::kGlobal;
  else throw ConfigError("scheme", "unknown scheme '" + std::string(text) + "'");
  if (s.phase_bits > 0)
    detail::require(s.kind != SchemeKind::kIdeal && s.kind != SchemeKind::kGlobal, "scheme",
                    "phase quantization needs an over-the-air scheme");
  return s;
}

// Quantities of one simulated uplink round kept for diagnostics.
struct RoundOutcome {
  std::vector<std::vector<double>> estimates;  // g_hat_m per cluster
  AggregationDesign design;
  bool solver_converged = true;
};

// One over-the-air aggregation round: fresh channels, RIS configuration,
// power/denoiser selection, superposed uplink and per-cluster estimation.
// Everything random is derived from round_seed. Local gradients are raw;
// normalization happens here as on the devices.
inline RoundOutcome aggregate_round(const SystemConfig& cfg, const BetaMatrix& beta,
                                    const std::vector<std::vector<std::size_t>>& members,
                                    const Scheme& scheme,
                                    std::span<const std::vector<double>> local_gradients,
                                    std::uint64_t round_seed) {
  const std::size_t K = cfg.num_devices;
  const std::size_t M = cfg.num_clusters;
  detail::require_dims(local_gradients.size() == K, "one local gradient per device");
  RoundOutcome out;
  if (scheme.kind == SchemeKind::kIdeal || scheme.kind == SchemeKind::kGlobal) {
    for (std::size_t m = 0; m < M; ++m) out.estimates.push_back(cluster_average(local_gradients, members[m]));
    return out;
  }

  std::vector<NormalizedGradient> grads;
  grads.reserve(K);
  std::vector<double> sigmas(K);
  for (std::size_t k = 0; k < K; ++k) {
    grads.push_back(normalize_gradient(local_gradients[k]));
    sigmas[k] = grads[k].std;
  }

  const ChannelSet ch = sample_small_scale(cfg, round_seed);
  RisPhases phases = scheme.kind == SchemeKind::kRandomPhase
                         ? baseline_phases(BaselineMode::kRandom, M, cfg.num_ris_elements, round_seed)
                         : align_cluster_phases(ch, members);
  if (scheme.phase_bits > 0) phases = corrupt_phases(phases, scheme.phase_bits);
  const Matrix<cplx> composite = composite_channel(ch, beta, phases);
  Matrix<double> hbar(M, K);
  for (std::size_t j = 0; j < hbar.data().size(); ++j) hbar.data()[j] = composite.data()[j].real();

  const AggregationDesign unbiased =
      unbiased_design(beta, sigmas, cfg.max_power, cfg.model_dim, cfg.num_ris_elements, members);
  switch (scheme.kind) {
    case SchemeKind::kUnbiased:
      out.design = unbiased;
      break;
    case SchemeKind::kMmse:
    case SchemeKind::kRandomPhase:
      out.design = mmse_design(unbiased.powers, hbar, sigmas, cfg.noise_var, members, unbiased.denoisers);
      break;
    case SchemeKind::kMmsePowopt: {
      const RatioProblem prob = assemble_ratio_problem(hbar, sigmas, cfg.noise_var, members, cfg.max_power);
      SolverOptions opts;
      opts.seed = round_seed;
      const SolverResult sol = solve_projected_ascent(prob, opts);
      out.solver_converged = sol.converged;
      std::vector<double> powers(K);
      for (std::size_t k = 0; k < K; ++k) powers[k] = std::min(sol.q[k] * sol.q[k], cfg.max_power[k]);
      // A cluster silenced by the solver has MSE decreasing in lambda; the
      // unbiased lambda belongs to other powers.
      const std::vector<double> silent(M, std::numeric_limits<double>::infinity());
      out.design = mmse_design(std::move(powers), hbar, sigmas, cfg.noise_var, members, silent);
      break;
    }
    default:
      break;
  }

  const ReceivedMatrix y = uplink(composite, out.design.powers, grads, cfg.noise_var, round_seed);
  out.estimates = estimate_all(y, out.design.denoisers, grads, members);
  return out;
}

// sum_m ||g_hat_m - g_m||^2 / sum_m ||g_m||^2 (0 when the truth is all zero and the error is too).
inline double normalized_mse(const std::vector<std::vector<double>>& estimates,
                             const std::vector<std::vector<double>>& truth) {
  double err = 0.0;
  double energy = 0.0;
  for (std::size_t m = 0; m < truth.size(); ++m)
    for (std::size_t d = 0; d < truth[m].size(); ++d) {
      const double e = estimates[m][d] - truth[m][d];
      err += e * e;
      energy += truth[m][d] * truth[m][d];
    }
  if (energy == 0.0) return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return err / energy;
}

}  // namespace risfl
