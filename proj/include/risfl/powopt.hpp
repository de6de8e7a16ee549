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
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "risfl/error.hpp"
#include "risfl/matrix.hpp"
#include "risfl/rng.hpp"

namespace risfl {

// Sum-of-quadratic-ratios power control over q_k = sqrt(p_k):
//   maximize   sum_m (q^T b_m)^2 / (q^T diag(A_m) q + c_m)
//   subject to 0 <= q_k <= bounds_k.
// B_m = b_m b_m^T is never formed.
struct RatioProblem {
  Matrix<double> A;            // M x K, row m is the diagonal of A_m
  Matrix<double> b;            // M x K, row m is b_m
  std::vector<double> c;       // M
  std::vector<double> bounds;  // K, sqrt(P_k)

  std::size_t num_clusters() const noexcept { return A.rows(); }
  std::size_t num_devices() const noexcept { return A.cols(); }
};

inline void validate_problem(const RatioProblem& prob) {
  const std::size_t M = prob.A.rows();
  const std::size_t K = prob.A.cols();
  detail::require_dims(prob.b.rows() == M && prob.b.cols() == K, "b must be M x K like A");
  detail::require_dims(prob.c.size() == M, "c must have M entries");
  detail::require_dims(prob.bounds.size() == K, "bounds must have K entries");
  for (double a : prob.A.data()) detail::require(std::isfinite(a) && a >= 0.0, "A", "entries must be >= 0");
  for (double v : prob.b.data()) detail::require(std::isfinite(v), "b", "non-finite entry");
  for (double v : prob.c) detail::require(std::isfinite(v) && v >= 0.0, "c", "entries must be >= 0");
  for (double v : prob.bounds) detail::require(std::isfinite(v) && v >= 0.0, "bounds", "entries must be >= 0");
}

// hbar is the M x K matrix of realized cascaded gains (unit power, unit denoiser).
inline RatioProblem assemble_ratio_problem(const Matrix<double>& hbar, std::span<const double> sigmas,
                                           double noise_var,
                                           const std::vector<std::vector<std::size_t>>& members,
                                           std::span<const double> max_power) {
  const std::size_t M = hbar.rows();
  const std::size_t K = hbar.cols();
  detail::require_dims(members.size() == M, "one cluster per gain row");
  detail::require_dims(sigmas.size() == K && max_power.size() == K, "sigmas and max_power need K entries");
  RatioProblem prob{Matrix<double>(M, K), Matrix<double>(M, K), std::vector<double>(M),
                    std::vector<double>(K)};
  for (std::size_t m = 0; m < M; ++m) {
    const double size2 = static_cast<double>(members[m].size() * members[m].size());
    for (std::size_t k = 0; k < K; ++k)
      prob.A(m, k) = size2 * hbar(m, k) * hbar(m, k) * sigmas[k] * sigmas[k];
    for (std::size_t k : members[m]) prob.b(m, k) = hbar(m, k) * sigmas[k] * sigmas[k] * sigmas[k];
    prob.c[m] = size2 * noise_var / 2.0;
  }
  for (std::size_t k = 0; k < K; ++k) prob.bounds[k] = std::sqrt(max_power[k]);
  return prob;
}

inline double ratio_objective(const RatioProblem& prob, std::span<const double> q) {
  double total = 0.0;
  for (std::size_t m = 0; m < prob.num_clusters(); ++m) {
    double s = 0.0;
    double den = prob.c[m];
    for (std::size_t k = 0; k < q.size(); ++k) {
      s += prob.b(m, k) * q[k];
      den += prob.A(m, k) * q[k] * q[k];
    }
    if (den > 0.0) total += s * s / den;
  }
  return total;
}

inline std::vector<double> ratio_gradient(const RatioProblem& prob, std::span<const double> q) {
  std::vector<double> g(q.size(), 0.0);
  for (std::size_t m = 0; m < prob.num_clusters(); ++m) {
    double s = 0.0;
    double den = prob.c[m];
    for (std::size_t k = 0; k < q.size(); ++k) {
      s += prob.b(m, k) * q[k];
      den += prob.A(m, k) * q[k] * q[k];
    }
    if (den <= 0.0) continue;
    const double lin = 2.0 * s / den;
    const double quad = 2.0 * s * s / (den * den);
    for (std::size_t k = 0; k < q.size(); ++k) g[k] += lin * prob.b(m, k) - quad * prob.A(m, k) * q[k];
  }
  return g;
}

struct SolverOptions {
  std::size_t max_iters = 5000;
  std::size_t restarts = 8;
  double tol = 1e-9;
  double armijo = 1e-4;
  std::size_t memory = 10;  // nonmonotone line-search window; 1 is monotone
  std::uint64_t seed = 0;
};

struct SolverResult {
  std::vector<double> q;
  double objective = 0.0;
  bool converged = false;  // false: best iterate returned after max_iters
  std::size_t iterations = 0;
};

namespace detail {

// Norm of the box-projected gradient, in coordinates scaled by the bounds.
inline double projected_gradient_norm(std::span<const double> x, std::span<const double> gx) {
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double g = gx[k];
    if (x[k] <= 0.0) g = std::max(g, 0.0);
    if (x[k] >= 1.0) g = std::min(g, 0.0);
    ss += g * g;
  }
  return std::sqrt(ss);
}

}  // namespace detail

// Multi-start spectral projected gradient ascent: Barzilai-Borwein step
// lengths, nonmonotone Armijo search along the projected direction against
// the worst of the last `memory` objective values. The best iterate is
// returned. Iterates live in x = q / bounds in [0, 1]^K and the objective
// is rescaled by its value at the all-bounds start, so tol is independent
// of problem units.
inline SolverResult solve_projected_ascent(const RatioProblem& prob, const SolverOptions& opts = {}) {
  validate_problem(prob);
  const std::size_t K = prob.num_devices();
  const auto& ub = prob.bounds;
  std::vector<double> q(K);
  auto to_q = [&](std::span<const double> x) {
    for (std::size_t k = 0; k < K; ++k) q[k] = x[k] * ub[k];
    return std::span<const double>(q);
  };

  std::vector<double> ones(K, 1.0);
  const double f_ref = ratio_objective(prob, to_q(ones));
  const double scale = f_ref > 0.0 ? 1.0 / f_ref : 1.0;
  auto f = [&](std::span<const double> x) { return scale * ratio_objective(prob, to_q(x)); };
  auto grad = [&](std::span<const double> x) {
    auto g = ratio_gradient(prob, to_q(x));
    for (std::size_t k = 0; k < K; ++k) g[k] *= scale * ub[k];
    return g;
  };

  constexpr double kMinStep = 1e-10;
  constexpr double kMaxStep = 1e10;

  SolverResult best;
  best.objective = -1.0;
  Rng rng = make_rng(opts.seed, Purpose::kSolver);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t start = 0; start < std::max<std::size_t>(opts.restarts, 1); ++start) {
    std::vector<double> x(K, 1.0);
    if (start > 0)
      for (double& v : x) v = unit(rng);
    double fx = f(x);
    auto g = grad(x);
    std::vector<double> recent{fx};
    std::vector<double> best_x = x;
    double best_f = fx;
    double alpha = 1.0;
    bool converged = false;
    std::size_t it = 0;
    std::vector<double> d(K), trial(K);
    for (; it < opts.max_iters; ++it) {
      if (detail::projected_gradient_norm(x, g) <= opts.tol * (1.0 + std::abs(fx))) {
        converged = true;
        break;
      }
      double slope = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        d[k] = std::clamp(x[k] + alpha * g[k], 0.0, 1.0) - x[k];
        slope += g[k] * d[k];
      }
      const double floor_f = *std::min_element(recent.begin(), recent.end());
      double t = 1.0;
      bool accepted = false;
      double ft = fx;
      for (int halvings = 0; halvings < 60; ++halvings) {
        for (std::size_t k = 0; k < K; ++k) trial[k] = std::clamp(x[k] + t * d[k], 0.0, 1.0);
        ft = f(trial);
        if (ft >= floor_f + opts.armijo * t * slope) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted || slope <= 0.0) {
        // No ascent possible at machine precision: x is stationary up to rounding.
        converged = true;
        break;
      }
      const auto g_new = grad(trial);
      double ss = 0.0, sy = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double sk = trial[k] - x[k];
        ss += sk * sk;
        sy += sk * (g_new[k] - g[k]);
      }
      // Ascent on a locally concave model: sy < 0.
      alpha = sy < 0.0 ? std::clamp(ss / -sy, kMinStep, kMaxStep) : kMaxStep;
      x.swap(trial);
      fx = ft;
      g = g_new;
      if (fx > best_f) {
        best_f = fx;
        best_x = x;
      }
      recent.push_back(fx);
      if (recent.size() > std::max<std::size_t>(opts.memory, 1)) recent.erase(recent.begin());
    }
    const double raw = ratio_objective(prob, to_q(best_x));
    if (raw > best.objective) {
      best.q.assign(q.begin(), q.end());
      best.objective = raw;
      best.converged = converged;
      best.iterations = it;
    }
  }
  return best;
}

struct OracleResult {
  std::vector<double> q;
  double objective = 0.0;
};

// Exhaustive search on the uniform grid over [0, bounds_k]^K; K <= 4.
inline OracleResult brute_force_oracle(const RatioProblem& prob, std::size_t points_per_dim) {
  validate_problem(prob);
  const std::size_t K = prob.num_devices();
  detail::require(K <= 4, "num_devices", "brute force limited to K <= 4");
  detail::require(points_per_dim >= 2, "points_per_dim", "must be >= 2");
  std::vector<std::size_t> idx(K, 0);
  std::vector<double> q(K, 0.0);
  OracleResult best{q, ratio_objective(prob, q)};
  const double denom = static_cast<double>(points_per_dim - 1);
  while (true) {
    for (std::size_t k = 0; k < K; ++k) q[k] = prob.bounds[k] * static_cast<double>(idx[k]) / denom;
    const double v = ratio_objective(prob, q);
    if (v > best.objective) best = {q, v};
    std::size_t d = 0;
    while (d < K && ++idx[d] == points_per_dim) idx[d++] = 0;
    if (d == K) break;
  }
  return best;
}

inline void to_json(nlohmann::json& j, const RatioProblem& p) {
  auto rows = [](const Matrix<double>& mat) {
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < mat.rows(); ++r) out.emplace_back(mat.row(r).begin(), mat.row(r).end());
    return out;
  };
  j = nlohmann::json{{"A", rows(p.A)}, {"b", rows(p.b)}, {"c", p.c}, {"bounds", p.bounds}};
}

inline void from_json(const nlohmann::json& j, RatioProblem& p) {
  auto matrix = [](const nlohmann::json& v, const char* name) {
    const auto rows = v.get<std::vector<std::vector<double>>>();
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Matrix<double> out(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      detail::require(rows[r].size() == cols, name, "ragged rows");
      std::copy(rows[r].begin(), rows[r].end(), out.row(r).begin());
    }
    return out;
  };
  p.A = matrix(j.at("A"), "A");
  p.b = matrix(j.at("b"), "b");
  j.at("c").get_to(p.c);
  j.at("bounds").get_to(p.bounds);
  validate_problem(p);
}

}  // namespace risfl
