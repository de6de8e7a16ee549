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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "risfl/error.hpp"
#include "risfl/flsim.hpp"
#include "risfl/harness.hpp"
#include "risfl/powopt.hpp"
#include "risfl/round.hpp"
#include "risfl/sysmodel.hpp"

namespace risfl {

namespace detail {

// Thrown for configuration problems that should yield usage text and exit 2.
struct UsageError : Error {
  using Error::Error;
};

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed config '" + path + "': " + e.what());
  }
}

inline SystemConfig read_system_config(const nlohmann::json& j, std::optional<std::uint64_t> seed) {
  SystemConfig cfg;
  try {
    cfg = j.get<SystemConfig>();
    if (seed) cfg.master_seed = *seed;
    validate_config(cfg);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  } catch (const ConfigError& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

template <typename T>
T section_value(const nlohmann::json& j, const char* section, const char* key, T fallback) {
  if (!j.contains(section)) return fallback;
  return j.at(section).value(key, fallback);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw Error("write failed for '" + path + "'");
}

}  // namespace detail

// Entry point of the risfl command line tool. Subcommands:
//   nmse-sweep, verify-elimination, power-opt, train
// Returns 0 on success, 2 on usage/config errors, 1 on runtime failures.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"RIS-assisted personalized over-the-air federated learning simulator", "risfl"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;

  auto* sweep = app.add_subcommand("nmse-sweep", "NMSE versus N and P for a set of schemes");
  std::optional<std::size_t> sweep_trials;
  std::vector<std::string> sweep_schemes;
  std::vector<std::size_t> sweep_n;
  std::vector<double> sweep_p;
  sweep->add_option("--trials", sweep_trials, "Monte Carlo trials per point");
  sweep->add_option("--schemes", sweep_schemes, "schemes, e.g. unbiased mmse random-phase mmse-q1");
  sweep->add_option("--n-list", sweep_n, "RIS element counts");
  sweep->add_option("--p-list", sweep_p, "per-device power budgets (W)");

  auto* verify = app.add_subcommand("verify-elimination", "Monte Carlo check of statistical interference elimination");
  std::optional<std::size_t> verify_trials;
  std::string phase_mode = "aligned";
  verify->add_option("--trials", verify_trials, "channel draws");
  verify->add_option("--phases", phase_mode, "aligned or random")->check(CLI::IsMember({"aligned", "random"}));

  auto* powopt = app.add_subcommand("power-opt", "solve a sum-of-quadratic-ratios power control instance");
  std::size_t restarts = 8;
  std::optional<std::size_t> oracle_grid;
  powopt->add_option("--restarts", restarts, "multi-start count");
  powopt->add_option("--oracle-grid", oracle_grid, "also run the exhaustive grid oracle (K <= 4)");

  auto* train = app.add_subcommand("train", "run personalized over-the-air FL on synthetic clustered tasks");
  std::optional<std::string> train_scheme;
  std::optional<std::size_t> rounds;
  std::optional<double> eta;
  train->add_option("--scheme", train_scheme, "ideal, unbiased, mmse, mmse+powopt, random-phase, global");
  train->add_option("--rounds", rounds, "training rounds");
  train->add_option("--eta", eta, "constant learning rate");

  for (auto* sub : {sweep, verify, powopt, train}) {
    sub->add_option("--config", config_path, "JSON config")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out_path, "output file")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    const nlohmann::json j = detail::read_json(config_path);

    if (sweep->parsed()) {
      const SystemConfig cfg = detail::read_system_config(j, seed);
      const auto sj = j.contains("sweep") ? j.at("sweep") : nlohmann::json::object();
      if (sweep_schemes.empty())
        sweep_schemes = sj.value("schemes", std::vector<std::string>{"unbiased", "mmse", "random-phase"});
      if (sweep_n.empty()) sweep_n = sj.value("n_list", std::vector<std::size_t>{16, 32, 64, 128, 256});
      if (sweep_p.empty()) sweep_p = sj.value("p_list", std::vector<double>{cfg.max_power.front()});
      const std::size_t trials = sweep_trials.value_or(sj.value("trials", std::size_t{500}));
      std::vector<Scheme> schemes;
      try {
        for (const auto& s : sweep_schemes) schemes.push_back(parse_scheme(s));
      } catch (const ConfigError& e) {
        throw detail::UsageError(e.what());
      }
      const auto result = nmse_sweep(cfg, schemes, sweep_n, sweep_p, trials, cfg.master_seed);
      export_csv(result, out_path);
      out << "nmse-sweep: " << result.rows.size() << " rows, " << trials << " trials/point -> " << out_path
          << "\n";
      return 0;
    }

    if (verify->parsed()) {
      const SystemConfig cfg = detail::read_system_config(j, seed);
      const std::size_t trials =
          verify_trials.value_or(detail::section_value(j, "elimination", "trials", std::size_t{100000}));
      if (trials < 2) throw detail::UsageError("--trials must be >= 2");
      const PhaseMode mode = phase_mode == "random" ? PhaseMode::kRandom : PhaseMode::kAligned;
      const auto report = verify_elimination(cfg, trials, cfg.master_seed, mode);
      export_csv(report, out_path);
      std::size_t failed = 0;
      for (const auto& r : report.rows) failed += r.pass ? 0 : 1;
      for (const auto& c : report.corrections) failed += c.pass ? 0 : 1;
      out << "verify-elimination: " << report.rows.size() << " pairs, " << report.corrections.size()
          << " foreign-RIS terms, " << failed << " outside 3 stderr -> " << out_path << "\n";
      return 0;
    }

    if (powopt->parsed()) {
      RatioProblem prob;
      try {
        prob = j.get<RatioProblem>();
      } catch (const nlohmann::json::exception& e) {
        throw detail::UsageError(std::string("malformed problem: ") + e.what());
      } catch (const Error& e) {
        throw detail::UsageError(std::string("invalid problem: ") + e.what());
      }
      SolverOptions opts;
      opts.restarts = restarts;
      opts.seed = seed.value_or(0);
      const SolverResult sol = solve_projected_ascent(prob, opts);
      std::vector<double> powers;
      for (double q : sol.q) powers.push_back(q * q);
      nlohmann::json res{{"q", sol.q},
                         {"powers", powers},
                         {"objective", sol.objective},
                         {"converged", sol.converged},
                         {"iterations", sol.iterations}};
      if (oracle_grid) {
        const auto oracle = brute_force_oracle(prob, *oracle_grid);
        res["oracle"] = {{"q", oracle.q}, {"objective", oracle.objective}, {"grid", *oracle_grid}};
      }
      detail::write_text(out_path, res.dump(2) + "\n");
      out << "power-opt: objective " << format_double(sol.objective)
          << (sol.converged ? "" : " (not converged)") << " -> " << out_path << "\n";
      return 0;
    }

    if (train->parsed()) {
      const SystemConfig cfg = detail::read_system_config(j, seed);
      Scheme scheme;
      try {
        scheme = parse_scheme(train_scheme.value_or(detail::section_value(j, "training", "scheme", std::string("unbiased"))));
      } catch (const ConfigError& e) {
        throw detail::UsageError(e.what());
      }
      const auto samples = detail::section_value(j, "training", "samples_per_device", std::size_t{50});
      const auto label_noise = detail::section_value(j, "training", "label_noise", 0.1);
      TrainingOptions opts;
      opts.rounds = rounds.value_or(detail::section_value(j, "training", "rounds", std::size_t{100}));
      const double rate = eta.value_or(detail::section_value(j, "training", "eta", 0.05));
      if (!(rate > 0.0)) throw detail::UsageError("--eta must be > 0");
      opts.eta = constant_rate(rate);
      opts.seed = cfg.master_seed;
      const Geometry geom = place_geometry(cfg, cfg.master_seed);
      const auto tasks = synth_clustered_tasks(cfg.num_clusters, cfg.num_devices, cfg.cluster_of, samples,
                                               cfg.model_dim, label_noise,
                                               derive_seed(cfg.master_seed, Purpose::kTasks));
      const auto hist = run_training(cfg, geom, tasks.datasets, scheme, opts);
      export_csv(hist, out_path);
      out << "train: scheme " << hist.scheme << ", " << opts.rounds << " rounds, final summed loss "
          << format_double(hist.final_summed_loss()) << " -> " << out_path << "\n";
      return 0;
    }
  } catch (const detail::UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace risfl
