// Copyright 2026 The Realfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Exit codes: 0 success, 1 invalid input,
// 2 verification failure.

#ifndef REALFILTER_CLI_HPP_
#define REALFILTER_CLI_HPP_

#include <CLI11.hpp>

#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <ostream>
#include <string>
#include <vector>

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"
#include "realfilter/gaussian.hpp"
#include "realfilter/instance_io.hpp"
#include "realfilter/mech_filters.hpp"
#include "realfilter/pure_dp.hpp"
#include "realfilter/real_filter.hpp"
#include "realfilter/sim.hpp"
#include "realfilter/strategies.hpp"
#include "realfilter/verify.hpp"

namespace realfilter {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitVerifyFailed = 2;

// Slack on the gap comparison for floating-point summation.
inline constexpr double kGapSlack = 1e-12;

namespace internal {

inline std::string Printf(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

inline std::string PairName(const DatabaseSpace& space, OrderedPair p) {
  return space.name(p.x) + "->" + space.name(p.x_prime);
}

inline int VerifyDp(const std::string& path, std::ostream& out) {
  const InstanceSpec spec = load_instance(path);
  const auto rule = spec.make_rule();
  const DatabaseSpace& space = spec.instance.space();
  out << "filter " << (spec.filter == FilterKind::kNaive ? "naive" : "delta_hat")
      << ", rounds " << spec.instance.max_rounds()
      << Printf(", epsilon %.12g, delta %.12g\n", spec.budget.epsilon,
                spec.budget.delta);
  bool pass = true;
  for (const auto& name : spec.strategies) {
    for (const PairGap& g : instance_gaps(spec.instance, parse_strategy(name),
                                          *rule, spec.budget.epsilon)) {
      const bool ok = g.gap <= spec.budget.delta + kGapSlack;
      pass = pass && ok;
      out << Printf("%-10s %-12s gap %.12g  %s\n", name.c_str(),
                    PairName(space, g.pair).c_str(), g.gap,
                    ok ? "pass" : "FAIL");
    }
  }
  out << (pass ? "result: pass\n" : "result: FAIL\n");
  return pass ? kExitOk : kExitVerifyFailed;
}

inline int PureDpCompare(const std::string& path, int rounds,
                         std::uint64_t seed, const std::string& database,
                         std::ostream& out) {
  const InstanceSpec spec = load_instance(path);
  const Instance& instance = spec.instance;
  const DatabaseSpace& space = instance.space();
  if (rounds < 1 || rounds > instance.max_rounds()) {
    throw ConfigError("--rounds must lie in 1..N");
  }
  DatabaseId x{0};
  if (!database.empty()) {
    auto found = space.find(database);
    if (!found) throw ConfigError("unknown database '" + database + "'");
    x = *found;
  }
  // Realised transcript: all N rounds without stopping.
  const FilterRun run = run_filter(x, instance, parse_strategy(spec.strategies.front()),
                                   StoppingRule(), seed);
  out << "realised on " << space.name(x) << " with strategy "
      << spec.strategies.front() << ", seed " << seed << ":";
  for (int i = 1; i <= run.stopping_time; ++i) {
    out << ' ' << spec.request_names.at(run.transcript.request(i).value) << '/'
        << spec.output_labels.at(static_cast<int>(run.transcript.output(i)));
  }
  out << '\n';
  for (int t = 1; t <= rounds; ++t) {
    const double c = eps_classical(instance, t);
    const double m = eps_mechanism(instance, run.transcript, t);
    const double r = eps_realisation(instance, run.transcript, t);
    out << Printf("t=%d eps_C %.12g eps_M %.12g eps_R %.12g\n", t, c, m, r);
    const AbcResult abc = abc_condition(instance, run.transcript, t);
    for (const AbcTerms& term : abc.terms) {
      out << Printf("  %-12s A %.12g B %.12g C %.12g sum %.12g\n",
                    PairName(space, term.pair).c_str(), term.a, term.b,
                    term.c, term.sum());
    }
    out << "  A+B+C >= 0 for all pairs: " << (abc.holds ? "yes" : "no")
        << '\n';
  }
  return kExitOk;
}

}  // namespace internal

inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out,
                        std::ostream& err) {
  CLI::App app{"Realisation-level privacy filters", "realfilter"};
  app.require_subcommand(1);

  int rounds = 0;
  double delta = 0.0;
  auto* optimize = app.add_subcommand(
      "optimize-params", "Optimal (delta_tilde, theta) for N rounds");
  optimize->add_option("--rounds", rounds, "N")->required();
  optimize->add_option("--delta", delta, "Target delta")->required();

  std::string config_path, out_path;
  std::uint64_t seed = 42;
  std::uint64_t trials = 0;
  int workers = 0;
  auto* survival =
      app.add_subcommand("survival", "Simulate stopping-time survival curves");
  survival->add_option("--config", config_path, "Config file")->required();
  survival->add_option("--seed", seed, "Master seed");
  survival->add_option("--trials", trials, "Monte Carlo trials");
  survival->add_option("--out", out_path, "CSV output path");
  survival->add_option("--workers", workers, "Worker threads");

  double sigma = 0.0, epsilon = 0.0;
  auto* stopping = app.add_subcommand(
      "stopping-times", "Mechanism-level stopping times T_a, T_av, T_RDP");
  stopping->add_option("--sigma", sigma)->required();
  stopping->add_option("--epsilon", epsilon)->required();
  stopping->add_option("--delta", delta)->required();

  std::string instance_path;
  auto* verify = app.add_subcommand(
      "verify-dp", "Exact DP gaps of a filter on a finite instance");
  verify->add_option("--instance", instance_path, "Instance file")->required();

  double p = 0.0;
  double cx_epsilon = 1.0, cx_delta = 0.1;
  int max_rounds = 10000;
  auto* counter = app.add_subcommand(
      "counterexample", "Naive filter on the binary erasure mechanism");
  counter->add_option("--p", p, "Reveal probability")->required();
  counter->add_option("--trials", trials, "Runs")->required();
  counter->add_option("--epsilon", cx_epsilon, "Budget epsilon");
  counter->add_option("--delta", cx_delta, "Budget delta");
  counter->add_option("--seed", seed, "Master seed");
  counter->add_option("--max-rounds", max_rounds, "Round cap");

  std::string database;
  auto* compare = app.add_subcommand(
      "pure-dp-compare", "Pure-DP composition versus realisation accounting");
  compare->add_option("--instance", instance_path, "Instance file")->required();
  compare->add_option("--rounds", rounds, "Largest t")->required();
  compare->add_option("--seed", seed, "Seed of the realised transcript");
  compare->add_option("--database", database, "Database the data comes from");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    if (*optimize) {
      const FilterParams fp = optimize_params(rounds, PrivacyBudget(0.0, delta));
      out << internal::Printf(
          "delta_tilde = %.6e\ntheta = %.6e\nquantile_sum = %.10g\n",
          fp.delta_tilde, fp.theta, quantile_sum(fp.delta_tilde, fp.theta));
      return kExitOk;
    }
    if (*survival) {
      SimConfig config = load_sim_config(config_path);
      if (survival->count("--seed")) config.seed = seed;
      if (survival->count("--trials")) config.trials = trials;
      if (survival->count("--out")) config.output_path = out_path;
      if (survival->count("--workers")) config.workers = workers;
      config.validate();
      const auto curves = simulate_survival(config);
      emit_csv(curves, config.output_path);
      out << "wrote " << config.output_path << " (seed " << config.seed
          << ", trials " << config.trials << ")\n";
      return kExitOk;
    }
    if (*stopping) {
      const GaussianSetting setting(sigma);
      const PrivacyBudget budget(epsilon, delta);
      out << "T_a = " << stopping_time_additive(setting, budget) << '\n'
          << "T_av = " << stopping_time_advanced(setting, budget) << '\n'
          << "T_RDP = " << stopping_time_rdp(setting, budget) << '\n';
      return kExitOk;
    }
    if (*verify) return internal::VerifyDp(instance_path, out);
    if (*counter) {
      const PrivacyBudget budget(cx_epsilon, cx_delta);
      if (p > budget.delta) {
        throw ConfigError("--p must not exceed --delta");
      }
      if (trials < 1) throw ConfigError("--trials must be >= 1");
      const Instance erasure = make_erasure_instance(p, max_rounds);
      std::uint64_t infinite = 0;
      double stop_sum = 0.0;
      for (std::uint64_t k = 0; k < trials; ++k) {
        const FilterRun run =
            naive_filter_run(erasure, budget, trial_seed(seed, k));
        if (run.realised_infinite_leakage()) ++infinite;
        stop_sum += run.stopping_time;
      }
      out << internal::Printf(
          "p = %.6g, epsilon = %.6g, delta = %.6g, trials = %llu\n"
          "infinite leakage at stop: %.6f\nmean stopping time: %.4f\n",
          p, cx_epsilon, cx_delta, static_cast<unsigned long long>(trials),
          static_cast<double>(infinite) / static_cast<double>(trials),
          stop_sum / static_cast<double>(trials));
      return kExitOk;
    }
    if (*compare) {
      return internal::PureDpCompare(instance_path, rounds, seed, database,
                                     out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace realfilter

#endif  // REALFILTER_CLI_HPP_
