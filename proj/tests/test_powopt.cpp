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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "risfl/channel.hpp"
#include "risfl/control.hpp"
#include "risfl/powopt.hpp"
#include "risfl/ris.hpp"
#include "risfl/sysmodel.hpp"

namespace risfl {
namespace {

using Members = std::vector<std::vector<std::size_t>>;

struct RandomRatio {
  Matrix<double> hbar;
  std::vector<double> sigmas;
  std::vector<double> max_power;
  double noise_var;
  Members members;
  RatioProblem prob;
};

RandomRatio random_ratio(std::uint64_t seed, std::size_t K = 3, std::size_t M = 2) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  RandomRatio r{Matrix<double>(M, K), std::vector<double>(K), std::vector<double>(K), 0.0, Members(M), {}};
  for (std::size_t k = 0; k < K; ++k) r.members[k * M / K].push_back(k);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t k = 0; k < K; ++k) r.hbar(m, k) = (k * M / K == m ? 1.0 : 0.0) + 0.8 * n(rng);
  for (std::size_t k = 0; k < K; ++k) {
    r.sigmas[k] = 0.5 + u(rng);
    r.max_power[k] = 0.1 + 2.0 * u(rng);
  }
  r.noise_var = 0.05 + 2.0 * u(rng);
  r.prob = assemble_ratio_problem(r.hbar, r.sigmas, r.noise_var, r.members, r.max_power);
  return r;
}

TEST(RatioProblemTest, ZeroPowerGivesZeroObjective) {
  const auto r = random_ratio(1);
  EXPECT_EQ(ratio_objective(r.prob, std::vector<double>(3, 0.0)), 0.0);
}

TEST(RatioProblemTest, SupportOfLinearFormsIsTheCluster) {
  const auto r = random_ratio(2, 6, 3);
  for (std::size_t m = 0; m < 3; ++m)
    for (std::size_t k = 0; k < 6; ++k)
      if (k * 3 / 6 != m) EXPECT_EQ(r.prob.b(m, k), 0.0);
}

TEST(RatioProblemTest, GradientMatchesFiniteDifferences) {
  const auto r = random_ratio(3, 5, 2);
  const std::vector<double> q{0.3, 0.9, 0.1, 0.7, 0.5};
  const auto g = ratio_gradient(r.prob, q);
  for (std::size_t k = 0; k < q.size(); ++k) {
    auto hi = q, lo = q;
    hi[k] += 1e-6;
    lo[k] -= 1e-6;
    const double fd = (ratio_objective(r.prob, hi) - ratio_objective(r.prob, lo)) / 2e-6;
    EXPECT_NEAR(g[k], fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

// objective(q) = sum_m (floor_m - MSE_m(lambda*_m)) / D with p = q^2.
TEST(RatioProblemTest, ObjectiveEqualsMseReduction) {
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    const auto r = random_ratio(seed, 5, 2);
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> q(5), p(5);
    for (std::size_t k = 0; k < 5; ++k) {
      q[k] = u(rng) * r.prob.bounds[k];
      p[k] = q[k] * q[k];
    }
    const std::size_t D = 11;
    double reduction = 0.0;
    for (std::size_t m = 0; m < 2; ++m) {
      const std::vector<double> zero(5, 0.0);
      const double lam = mmse_denoising(p, r.hbar.row(m), r.sigmas, r.noise_var, r.members, m);
      if (!std::isfinite(lam)) continue;  // negative correlation: the optimum discards the signal
      const double floor = conditional_mse(zero, 1.0, r.hbar.row(m), r.sigmas, 0.0, D, r.members, m);
      reduction += (floor - conditional_mse(p, lam, r.hbar.row(m), r.sigmas, r.noise_var, D, r.members, m)) / D;
    }
    const double obj = ratio_objective(r.prob, q);
    // A negative correlation still adds (q^T b)^2 > 0 to the objective; skip those.
    bool all_positive = true;
    for (std::size_t m = 0; m < 2; ++m) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += r.prob.b(m, k) * q[k];
      all_positive = all_positive && s > 0.0;
    }
    if (all_positive) EXPECT_NEAR(obj, reduction, 1e-9 * obj);
  }
}

TEST(RatioProblemTest, ScalingLinearFormsScalesObjectiveQuadratically) {
  auto r = random_ratio(4, 4, 2);
  const std::vector<double> q{0.2, 0.4, 0.6, 0.8};
  const double base = ratio_objective(r.prob, q);
  for (double& v : r.prob.b.data()) v *= 3.0;
  EXPECT_NEAR(ratio_objective(r.prob, q), 9.0 * base, 1e-12 * base);
}

TEST(SolverTest, ScalarMonotoneRatioGoesToBound) {
  RatioProblem prob{Matrix<double>(1, 1, 2.0), Matrix<double>(1, 1, 1.5), {0.7}, {1.3}};
  const auto sol = solve_projected_ascent(prob);
  EXPECT_DOUBLE_EQ(sol.q[0], 1.3);
  EXPECT_TRUE(sol.converged);
  const auto oracle = brute_force_oracle(prob, 17);
  EXPECT_DOUBLE_EQ(oracle.q[0], 1.3);
}

TEST(SolverTest, SymmetricClusterSaturatesEqually) {
  const std::size_t K = 4;
  Members members{{0, 1, 2, 3}};
  Matrix<double> hbar(1, K, 0.8);
  const std::vector<double> sigmas(K, 1.2), pmax(K, 0.5);
  const auto prob = assemble_ratio_problem(hbar, sigmas, 0.3, members, pmax);
  const auto sol = solve_projected_ascent(prob);
  for (double q : sol.q) EXPECT_NEAR(q, std::sqrt(0.5), 1e-6);
}

TEST(SolverTest, BeatsCoarseGridOnSmallInstances) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto r = random_ratio(seed);
    const auto sol = solve_projected_ascent(r.prob);
    const auto oracle = brute_force_oracle(r.prob, 60);
    EXPECT_GE(sol.objective, 0.995 * oracle.objective) << "seed " << seed;
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_GE(sol.q[k], 0.0);
      EXPECT_LE(sol.q[k], r.prob.bounds[k]);
    }
  }
}

TEST(SolverTest, StationaryAtReturnedPoint) {
  SolverOptions opts;
  opts.tol = 1e-7;
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    const auto r = random_ratio(seed, 8, 3);
    const auto sol = solve_projected_ascent(r.prob, opts);
    EXPECT_TRUE(sol.converged) << "seed " << seed;
  }
}

TEST(SolverTest, RaisingABoundNeverHurts) {
  for (std::uint64_t seed = 300; seed < 315; ++seed) {
    auto r = random_ratio(seed, 4, 2);
    const double before = solve_projected_ascent(r.prob).objective;
    r.prob.bounds[seed % 4] *= 1.5;
    EXPECT_GE(solve_projected_ascent(r.prob).objective, before * (1.0 - 1e-9)) << "seed " << seed;
  }
}

TEST(OracleTest, GridRefinementIsStable) {
  for (std::uint64_t seed = 400; seed < 410; ++seed) {
    const auto r = random_ratio(seed);
    const double coarse = brute_force_oracle(r.prob, 30).objective;
    const double fine = brute_force_oracle(r.prob, 60).objective;
    EXPECT_LT(std::abs(fine - coarse), 0.01 * fine) << "seed " << seed;
  }
}

TEST(OracleTest, RejectsLargeOrDegenerateGrids) {
  const auto r = random_ratio(5, 5, 2);
  EXPECT_THROW(brute_force_oracle(r.prob, 10), ConfigError);
  const auto small = random_ratio(5);
  EXPECT_THROW(brute_force_oracle(small.prob, 1), ConfigError);
}

TEST(RatioProblemTest, JsonRoundTripAndValidation) {
  const auto r = random_ratio(6, 4, 2);
  const nlohmann::json j = r.prob;
  const auto back = j.get<RatioProblem>();
  EXPECT_EQ(back.A, r.prob.A);
  EXPECT_EQ(back.b, r.prob.b);
  EXPECT_EQ(back.c, r.prob.c);
  EXPECT_EQ(back.bounds, r.prob.bounds);
  auto bad = j;
  bad["c"] = {1.0};
  EXPECT_THROW(bad.get<RatioProblem>(), DimensionError);
  bad = j;
  bad["A"][0][0] = -1.0;
  EXPECT_THROW(bad.get<RatioProblem>(), ConfigError);
}

// With memory 1 the search is monotone, so no start ends below where it began.
TEST(SolverTest, MonotoneVariantNeverEndsBelowItsStart) {
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    const auto r = random_ratio(seed, 4, 2);
    SolverOptions mono;
    mono.memory = 1;
    mono.restarts = 1;
    mono.max_iters = 100000;
    const auto res = solve_projected_ascent(r.prob, mono);
    EXPECT_TRUE(res.converged) << seed;
    EXPECT_GE(res.objective, ratio_objective(r.prob, r.prob.bounds)) << seed;
  }
}

double summed_mse(const std::vector<double>& powers, const Matrix<double>& hbar, const std::vector<double>& sigmas,
                  double noise_var, const Members& members, std::size_t D) {
  double total = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    double lambda = std::numeric_limits<double>::infinity();
    try {
      lambda = mmse_denoising(powers, hbar.row(m), sigmas, noise_var, members, m);
    } catch (const SignalVanished&) {
    }
    total += conditional_mse(powers, lambda, hbar.row(m), sigmas, noise_var, D, members, m);
  }
  return total;
}

// Optimized powers against the unbiased powers, both with MMSE denoisers,
// on realized channels.
TEST(SolverTest, OptimizedPowersBeatUnbiasedPowers) {
  SystemConfig cfg;
  cfg.num_devices = 8;
  cfg.num_clusters = 2;
  cfg.num_ris_elements = 32;
  cfg.model_dim = 16;
  cfg.cluster_of = round_robin_clusters(8, 2);
  cfg.max_power.assign(8, 0.01);
  cfg.noise_var = 1e-13;
  const auto members = cluster_members(cfg);
  const BetaMatrix beta = large_scale_coefficients(place_geometry(cfg, 3), cfg.pathloss_exponent);
  std::size_t wins = 0;
  const std::size_t instances = 50;
  for (std::uint64_t t = 0; t < instances; ++t) {
    Rng rng(t);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    std::vector<double> sigmas(8);
    for (double& s : sigmas) s = u(rng);
    const ChannelSet ch = sample_small_scale(cfg, t);
    const auto hbar = cascaded_gains(ch, beta, align_cluster_phases(ch, members));
    const auto unbiased = unbiased_design(beta, sigmas, cfg.max_power, cfg.model_dim, 32, members);
    const auto prob = assemble_ratio_problem(hbar, sigmas, cfg.noise_var, members, cfg.max_power);
    SolverOptions opts;
    opts.seed = t;
    const auto sol = solve_projected_ascent(prob, opts);
    std::vector<double> powers(8);
    for (std::size_t k = 0; k < 8; ++k) powers[k] = std::min(sol.q[k] * sol.q[k], cfg.max_power[k]);
    wins += summed_mse(powers, hbar, sigmas, cfg.noise_var, members, 16) <=
            summed_mse(unbiased.powers, hbar, sigmas, cfg.noise_var, members, 16);
  }
  EXPECT_GE(wins, 45u);
}

}  // namespace
}  // namespace risfl
