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
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "risfl/channel.hpp"
#include "risfl/error.hpp"
#include "risfl/flsim.hpp"
#include "risfl/ris.hpp"
#include "risfl/rng.hpp"
#include "risfl/round.hpp"
#include "risfl/sysmodel.hpp"

namespace risfl {

// Welford running mean/variance; stderr is the standard error of the mean.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_of_mean() const noexcept {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// FNV-1a over the canonical JSON form of the configuration.
inline std::uint64_t config_digest(const SystemConfig& cfg) {
  const std::string text = nlohmann::json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct SweepRow {
  std::size_t num_elements = 0;
  double max_power = 0.0;
  std::string scheme;
  std::size_t trials = 0;
  double nmse_mean = 0.0;
  double nmse_stderr = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;

  // First row matching (N, P, scheme); throws when absent.
  const SweepRow& at(std::size_t n, double p, const std::string& scheme) const {
    for (const auto& r : rows)
      if (r.num_elements == n && r.max_power == p && r.scheme == scheme) return r;
    throw Error("no sweep row for N=" + std::to_string(n) + " scheme=" + scheme);
  }
};

// NMSE of every scheme at every (N, P) point. Geometry is fixed by `seed`;
// each trial draws fresh channels, noise and synthetic i.i.d. N(0, 1) local
// gradients. Trials are shared across schemes and powers (common random
// numbers), so scheme differences are paired.
inline SweepResult nmse_sweep(const SystemConfig& base, const std::vector<Scheme>& schemes,
                              const std::vector<std::size_t>& n_list, const std::vector<double>& p_list,
                              std::size_t trials, std::uint64_t seed) {
  validate_config(base);
  detail::require(trials >= 1, "trials", "must be >= 1");
  const Geometry geom = place_geometry(base, seed);
  const BetaMatrix beta = large_scale_coefficients(geom, base.pathloss_exponent);
  const auto members = cluster_members(base);
  const std::size_t K = base.num_devices;
  const std::size_t D = base.model_dim;

  SweepResult result;
  result.seed = seed;
  result.config_digest = config_digest(base);
  std::vector<std::vector<double>> local(K, std::vector<double>(D));
  std::vector<std::vector<double>> truth;
  for (std::size_t n : n_list) {
    for (double p : p_list) {
      SystemConfig cfg = base;
      cfg.num_ris_elements = n;
      cfg.max_power.assign(K, p);
      validate_config(cfg);
      std::vector<RunningStat> stats(schemes.size());
      for (std::size_t trial = 0; trial < trials; ++trial) {
        Rng grng = make_rng(seed, Purpose::kGradients, {trial});
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& g : local)
          for (double& v : g) v = normal(grng);
        truth.clear();
        for (const auto& mem : members) truth.push_back(cluster_average(local, mem));
        const std::uint64_t round_seed = derive_seed(seed, Purpose::kRound, {n, trial});
        for (std::size_t s = 0; s < schemes.size(); ++s) {
          const auto est = aggregate_round(cfg, beta, members, schemes[s], local, round_seed).estimates;
          stats[s].add(normalized_mse(est, truth));
        }
      }
      for (std::size_t s = 0; s < schemes.size(); ++s)
        result.rows.push_back({n, p, schemes[s].name(), trials, stats[s].mean(), stats[s].stderr_of_mean()});
    }
  }
  return result;
}

enum class PhaseMode { kAligned, kRandom };

struct EliminationRow {
  std::size_t m = 0;
  std::size_t k = 0;
  bool same_cluster = false;
  double mean = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  bool pass = false;
};

// Own-cluster pair, contribution of a foreign RIS i != m; its mean must vanish.
struct CorrectionRow {
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t i = 0;
  double mean = 0.0;
  double std_error = 0.0;
  bool pass = false;
};

struct EliminationReport {
  std::vector<EliminationRow> rows;
  std::vector<CorrectionRow> corrections;
  std::size_t trials = 0;
  std::uint64_t seed = 0;

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    for (const auto& c : corrections)
      if (!c.pass) return false;
    return true;
  }
};

// Mean coupling (unit power, unit denoiser) hbar_{m,k} of every
// antenna/device pair over `trials` channel draws. With co-phased RISs the
// own-cluster target is beta(m,k) pi N / (4 sqrt|K_m|) and the cross-cluster
// target 0; with random phases every target is 0. Pass means |mean - target|
// <= 3 standard errors.
inline EliminationReport verify_elimination(const SystemConfig& cfg, const BetaMatrix& beta,
                                            std::size_t trials, std::uint64_t seed,
                                            PhaseMode mode = PhaseMode::kAligned) {
  validate_config(cfg);
  detail::require(trials >= 2, "trials", "must be >= 2");
  const std::size_t M = cfg.num_clusters;
  const std::size_t K = cfg.num_devices;
  const std::size_t N = cfg.num_ris_elements;
  const auto members = cluster_members(cfg);
  detail::require_dims(beta.rows() == M && beta.cols() == K, "beta must be M x K");

  std::vector<RunningStat> pair(M * K);
  std::vector<RunningStat> term(M * K * M);
  std::vector<double> parts(M);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t round_seed = derive_seed(seed, Purpose::kRound, {trial});
    const ChannelSet ch = sample_small_scale(cfg, round_seed);
    const RisPhases phases = mode == PhaseMode::kAligned
                                 ? align_cluster_phases(ch, members)
                                 : baseline_phases(BaselineMode::kRandom, M, N, round_seed);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t k = 0; k < K; ++k) {
        double total = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
          parts[i] = beta(i, k) * reflected_path(ch, phases, i, m, k).real();
          total += parts[i];
        }
        pair[m * K + k].add(total);
        if (cfg.cluster_of[k] == m)
          for (std::size_t i = 0; i < M; ++i) term[(m * K + k) * M + i].add(parts[i]);
      }
  }

  EliminationReport report;
  report.trials = trials;
  report.seed = seed;
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t k = 0; k < K; ++k) {
      const bool same = cfg.cluster_of[k] == m;
      const auto& st = pair[m * K + k];
      double target = 0.0;
      if (same && mode == PhaseMode::kAligned)
        target = beta(m, k) * std::numbers::pi * static_cast<double>(N) /
                 (4.0 * std::sqrt(static_cast<double>(members[m].size())));
      const double se = st.stderr_of_mean();
      report.rows.push_back({m, k, same, st.mean(), se, target, std::abs(st.mean() - target) <= 3.0 * se});
      if (!same) continue;
      for (std::size_t i = 0; i < M; ++i) {
        if (i == m) continue;
        const auto& ts = term[(m * K + k) * M + i];
        report.corrections.push_back(
            {m, k, i, ts.mean(), ts.stderr_of_mean(), std::abs(ts.mean()) <= 3.0 * ts.stderr_of_mean()});
      }
    }
  return report;
}

inline EliminationReport verify_elimination(const SystemConfig& cfg, std::size_t trials, std::uint64_t seed,
                                            PhaseMode mode = PhaseMode::kAligned) {
  const Geometry geom = place_geometry(cfg, seed);
  return verify_elimination(cfg, large_scale_coefficients(geom, cfg.pathloss_exponent), trials, seed,
                            mode);
}

// 17 significant digits: parses back to the identical double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

inline void finish_csv(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace detail

inline void export_csv(const SweepResult& result, const std::string& path) {
  auto out = detail::open_csv(path);
  out << "N,P_max,scheme,trials,nmse_mean,nmse_stderr,seed\n";
  for (const auto& r : result.rows)
    out << r.num_elements << ',' << format_double(r.max_power) << ',' << r.scheme << ',' << r.trials << ','
        << format_double(r.nmse_mean) << ',' << format_double(r.nmse_stderr) << ',' << result.seed << '\n';
  detail::finish_csv(out, path);
}

inline void export_csv(const EliminationReport& report, const std::string& path) {
  auto out = detail::open_csv(path);
  out << "m,k,same_cluster,mean,stderr,target,pass\n";
  for (const auto& r : report.rows)
    out << r.m << ',' << r.k << ',' << (r.same_cluster ? 1 : 0) << ',' << format_double(r.mean) << ','
        << format_double(r.std_error) << ',' << format_double(r.target) << ',' << (r.pass ? 1 : 0) << '\n';
  detail::finish_csv(out, path);
}

inline void export_csv(const TrainingHistory& hist, const std::string& path) {
  auto out = detail::open_csv(path);
  out << "round,cluster,loss,nmse,scheme,seed\n";
  for (std::size_t t = 0; t < hist.loss.rows(); ++t)
    for (std::size_t m = 0; m < hist.loss.cols(); ++m)
      out << t << ',' << m << ',' << format_double(hist.loss(t, m)) << ',' << format_double(hist.nmse[t])
          << ',' << hist.scheme << ',' << hist.seed << '\n';
  detail::finish_csv(out, path);
}

}  // namespace risfl
