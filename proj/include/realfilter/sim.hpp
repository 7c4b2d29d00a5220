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

// Survival curves P(T >= t) for the realisation-level filter (seeded Monte
// Carlo) and the mechanism-level filters (deterministic steps) on repeated
// Gaussian rounds, with a line-oriented config and a CSV writer.

#ifndef REALFILTER_SIM_HPP_
#define REALFILTER_SIM_HPP_

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"
#include "realfilter/gaussian.hpp"
#include "realfilter/instance_io.hpp"
#include "realfilter/mech_filters.hpp"
#include "realfilter/real_filter.hpp"
#include "realfilter/strategies.hpp"

namespace realfilter {

inline const std::vector<std::string>& known_filters() {
  static const std::vector<std::string> names = {"additive", "advanced", "rdp",
                                                 "realisation"};
  return names;
}

struct SimConfig {
  double sigma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  int max_rounds = 0;
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 42;
  std::vector<std::string> filters = known_filters();
  std::string output_path = "survival.csv";
  std::optional<double> delta_tilde;
  std::optional<double> theta;
  // Thread count; does not affect results.
  int workers = 1;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw ConfigError("sigma must be positive");
    }
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
    if (!(delta > 0.0 && delta < 1.0)) {
      throw ConfigError("delta must lie in (0, 1)");
    }
    if (max_rounds < 1) throw ConfigError("max_rounds must be positive");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (delta_tilde.has_value() != theta.has_value()) {
      throw ConfigError("delta_tilde and theta are overridden together");
    }
    for (const auto& f : filters) {
      if (std::find(known_filters().begin(), known_filters().end(), f) ==
          known_filters().end()) {
        throw ConfigError("unknown filter '" + f + "'");
      }
    }
  }
};

inline SimConfig parse_sim_config(std::istream& in) {
  SimConfig c;
  bool seen_sigma = false, seen_eps = false, seen_delta = false,
       seen_rounds = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = internal::Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected '='");
    }
    const std::string key = internal::Trim(line.substr(0, eq));
    const std::string value = internal::Trim(line.substr(eq + 1));
    auto count = [&] {
      const double v = internal::ParseNumber(value, key);
      if (v < 0 || v != std::floor(v) || v > 1.8e19) {
        throw ConfigError("bad integer for " + key + ": '" + value + "'");
      }
      return static_cast<std::uint64_t>(v);
    };
    if (key == "sigma") {
      c.sigma = internal::ParseNumber(value, key);
      seen_sigma = true;
    } else if (key == "epsilon") {
      c.epsilon = internal::ParseNumber(value, key);
      seen_eps = true;
    } else if (key == "delta") {
      c.delta = internal::ParseNumber(value, key);
      seen_delta = true;
    } else if (key == "max_rounds") {
      c.max_rounds = internal::ParseCount(value, key);
      seen_rounds = true;
    } else if (key == "trials") {
      c.trials = count();
    } else if (key == "seed") {
      // Seeds may exceed 2^53, so parse as an integer.
      char* end = nullptr;
      c.seed = std::strtoull(value.c_str(), &end, 10);
      if (value.empty() || end != value.c_str() + value.size()) {
        throw ConfigError("bad seed '" + value + "'");
      }
    } else if (key == "filters") {
      c.filters.clear();
      std::stringstream ss(value);
      for (std::string f; std::getline(ss, f, ',');) {
        f = internal::Trim(f);
        if (!f.empty()) c.filters.push_back(f);
      }
    } else if (key == "output_path") {
      c.output_path = value;
    } else if (key == "delta_tilde") {
      c.delta_tilde = internal::ParseNumber(value, key);
    } else if (key == "theta") {
      c.theta = internal::ParseNumber(value, key);
    } else if (key == "workers") {
      c.workers = internal::ParseCount(value, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  if (!seen_sigma || !seen_eps || !seen_delta || !seen_rounds) {
    throw ConfigError("config needs sigma, epsilon, delta and max_rounds");
  }
  c.validate();
  return c;
}

inline SimConfig load_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_sim_config(in);
}

struct SurvivalCurve {
  std::string filter;
  // survival[t] = P(T >= t), t = 0..N.
  std::vector<double> survival;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;

  int max_rounds() const { return static_cast<int>(survival.size()) - 1; }
  double standard_error(int t) const {
    const double s = survival.at(t);
    return std::sqrt(s * (1.0 - s) / static_cast<double>(trials));
  }
};

// Independent stream per trial, so results do not depend on how trials are
// split across threads.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ trial);
}

inline FilterParams realisation_params(const SimConfig& config) {
  const PrivacyBudget budget(config.epsilon, config.delta);
  if (config.delta_tilde) {
    return FilterParams(*config.delta_tilde, *config.theta, config.max_rounds,
                        budget);
  }
  return optimize_params(config.max_rounds, budget);
}

inline SurvivalCurve step_curve(const std::string& name, std::int64_t stop,
                                const SimConfig& config) {
  SurvivalCurve curve{name, {}, config.trials, config.seed};
  for (int t = 0; t <= config.max_rounds; ++t) {
    curve.survival.push_back(t <= stop ? 1.0 : 0.0);
  }
  return curve;
}

inline SurvivalCurve realisation_curve(const SimConfig& config) {
  const GaussianSetting setting(config.sigma);
  const PrivacyBudget budget(config.epsilon, config.delta);
  const FilterParams params = realisation_params(config);
  const Instance instance = setting.instance(config.max_rounds);
  const GaussianThresholdRule rule(setting, budget, params);
  const Strategy strategy = fixed_strategy(0);
  const int n = config.max_rounds;

  const std::uint64_t workers =
      std::min<std::uint64_t>(config.workers, config.trials);
  std::vector<std::vector<std::uint64_t>> counts(
      workers, std::vector<std::uint64_t>(n + 1, 0));
  auto work = [&](std::uint64_t w) {
    const std::uint64_t begin = config.trials * w / workers;
    const std::uint64_t end = config.trials * (w + 1) / workers;
    for (std::uint64_t k = begin; k < end; ++k) {
      const FilterRun run = run_filter(DatabaseId{0}, instance, strategy, rule,
                                       trial_seed(config.seed, k));
      ++counts[w][run.stopping_time];
    }
  };
  std::vector<std::thread> pool;
  for (std::uint64_t w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& th : pool) th.join();

  std::vector<std::uint64_t> total(n + 1, 0);
  for (const auto& c : counts) {
    for (int t = 0; t <= n; ++t) total[t] += c[t];
  }
  SurvivalCurve curve{"realisation", std::vector<double>(n + 1), config.trials,
                      config.seed};
  std::uint64_t at_least = 0;
  for (int t = n; t >= 0; --t) {
    at_least += total[t];
    curve.survival[t] =
        static_cast<double>(at_least) / static_cast<double>(config.trials);
  }
  return curve;
}

// One curve per requested filter, ordered by filter name.
inline std::vector<SurvivalCurve> simulate_survival(const SimConfig& config) {
  config.validate();
  const GaussianSetting setting(config.sigma);
  const PrivacyBudget budget(config.epsilon, config.delta);
  std::vector<std::string> names = config.filters;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<SurvivalCurve> curves;
  for (const auto& name : names) {
    if (name == "additive") {
      curves.push_back(
          step_curve(name, stopping_time_additive(setting, budget), config));
    } else if (name == "advanced") {
      curves.push_back(
          step_curve(name, stopping_time_advanced(setting, budget), config));
    } else if (name == "rdp") {
      curves.push_back(
          step_curve(name, stopping_time_rdp(setting, budget), config));
    } else {
      curves.push_back(realisation_curve(config));
    }
  }
  return curves;
}

inline void write_csv(const std::vector<SurvivalCurve>& curves,
                      std::ostream& out) {
  std::vector<const SurvivalCurve*> sorted;
  for (const auto& c : curves) sorted.push_back(&c);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SurvivalCurve* a, const SurvivalCurve* b) {
                     return a->filter < b->filter;
                   });
  out << "filter,t,survival,trials,seed\n";
  char buf[64];
  for (const SurvivalCurve* c : sorted) {
    for (int t = 0; t <= c->max_rounds(); ++t) {
      std::snprintf(buf, sizeof buf, "%.12g", c->survival[t]);
      out << c->filter << ',' << t << ',' << buf << ',' << c->trials << ','
          << c->seed << '\n';
    }
  }
}

inline void emit_csv(const std::vector<SurvivalCurve>& curves,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(curves, out);
  out.flush();
  if (!out) throw Error("failed writing '" + path + "'");
}

inline std::vector<SurvivalCurve> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "filter,t,survival,trials,seed") {
    throw ConfigError("missing CSV header");
  }
  std::vector<SurvivalCurve> curves;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 5) throw ConfigError("bad CSV row '" + line + "'");
    if (curves.empty() || curves.back().filter != f[0]) {
      curves.push_back({f[0], {}, std::stoull(f[3]), std::stoull(f[4])});
    }
    if (std::stoi(f[1]) != curves.back().max_rounds() + 1) {
      throw ConfigError("CSV rows out of order");
    }
    curves.back().survival.push_back(std::strtod(f[2].c_str(), nullptr));
  }
  return curves;
}

}  // namespace realfilter

#endif  // REALFILTER_SIM_HPP_
