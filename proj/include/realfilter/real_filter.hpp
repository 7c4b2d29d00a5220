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

// The realisation-level privacy filter.
//
// After releasing y_i the filter decides whether it will receive r_{i+1}.
// The decision looks only at (r^i, y^{i-1}) and l^(i-1): for every ordered
// neighbour pair (x, x') and every allowable r_{i+1}, the P_x-mass of
// outputs y_i whose next-round exceedance probability
//
//   P_x(L_{i+1}(x, x') > eps - l^(i)(x, x') | r^{i+1}, y^i)
//
// is above delta_tilde must be at most theta. Because the decision does not
// depend on y_i, the stopping event carries no extra information about the
// database.

#ifndef REALFILTER_REAL_FILTER_HPP_
#define REALFILTER_REAL_FILTER_HPP_

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"
#include "realfilter/gaussian.hpp"
#include "realfilter/mechanisms.hpp"
#include "realfilter/normal.hpp"

namespace realfilter {

// P_x(L(x, x') > eps - cumulative | partial) for the mechanism serving the
// round of `partial`, where cumulative is the leakage accrued before it.
inline double inner_tail(const Mechanism& mechanism, const Transcript& partial,
                         OrderedPair pair, double epsilon, double cumulative) {
  const double headroom = epsilon - cumulative;
  if (auto tail = mechanism.leakage_tail(partial, pair, headroom)) {
    return *tail;
  }
  auto atoms = mechanism.support(partial, pair.x);
  if (!atoms) {
    throw UnsupportedMechanismError(
        "mechanism has neither finite support nor an analytic leakage tail");
  }
  double tail = 0.0;
  for (const auto& a : *atoms) {
    const double leak =
        std::log(a.probability) -
        mechanism.log_density(partial, pair.x_prime, a.value);
    if (leak > headroom) tail += a.probability;
  }
  return tail;
}

inline double inner_tail(const Mechanism& mechanism, const Transcript& partial,
                         OrderedPair pair, double epsilon,
                         const LeakageLedger& ledger) {
  return inner_tail(mechanism, partial, pair, epsilon, ledger.at(pair));
}

namespace internal {

// Standardised breakpoints for integrating over a normal output law:
// log-spaced tail probabilities from 1e-17 up to one half, mirrored.
inline const std::vector<double>& NormalGrid() {
  static const std::vector<double> grid = [] {
    constexpr int kHalf = 64;
    std::vector<double> lower;
    const double a = std::log(1e-17), b = std::log(0.5);
    for (int k = 0; k < kHalf; ++k) {
      lower.push_back(std_normal_quantile(std::exp(a + (b - a) * k / (kHalf - 1))));
    }
    std::vector<double> z = lower;
    for (int k = kHalf - 2; k >= 0; --k) z.push_back(-lower[k]);
    return z;
  }();
  return grid;
}

// Mass of N(0, 1) on [lo, hi], computed from the nearer tail.
inline double NormalMass(double lo, double hi) {
  if (hi <= 0.0) return std_normal_cdf(hi) - std_normal_cdf(lo);
  if (lo >= 0.0) return std_normal_sf(lo) - std_normal_sf(hi);
  return 1.0 - std_normal_cdf(lo) - std_normal_sf(hi);
}

// Mass of a normal law on {y : excluded(y)}. Breakpoints are located on a
// quantile grid and refined by bisection, so regions that change membership
// at most once per grid cell are integrated exactly up to the 1e-17 tails.
template <typename Excluded>
double ExcludedNormalMass(const NormalLaw& law, Excluded&& excluded) {
  const auto& z = NormalGrid();
  auto at = [&](double zz) { return excluded(law.mean + law.stddev * zz); };
  std::vector<char> flag(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) flag[k] = at(z[k]) ? 1 : 0;
  double mass = 0.0;
  if (flag.front()) mass += std_normal_cdf(z.front());
  if (flag.back()) mass += std_normal_sf(z.back());
  for (std::size_t k = 0; k + 1 < z.size(); ++k) {
    if (flag[k] == flag[k + 1]) {
      if (flag[k]) mass += NormalMass(z[k], z[k + 1]);
      continue;
    }
    double lo = z[k], hi = z[k + 1];
    for (int it = 0; it < 64 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((at(mid) ? 1 : 0) == flag[k]) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double cut = 0.5 * (lo + hi);
    mass += flag[k] ? NormalMass(z[k], cut) : NormalMass(cut, z[k + 1]);
  }
  return mass;
}

}  // namespace internal

// P_x(Y_i not in Y~_i(delta_tilde) | r^i, y^{i-1}) for one pair and one
// candidate next request. `previous` is l^(i-1)(x, x').
inline double excluded_mass(const Mechanism& current, const Mechanism& next,
                            const Transcript& partial, OrderedPair pair,
                            double previous, Request next_request,
                            double epsilon, double delta_tilde) {
  // (r^{i+1}, y^i) with y_i overwritten per candidate. Round 0 only ever
  // releases the sentinel.
  const bool sentinel_round = partial.round() == 0;
  Transcript hypothetical =
      partial.with_output(sentinel_round ? kSentinelOutput : 0.0)
          .with_request(next_request);
  auto leaves_set = [&](Output y) {
    const double step = current.log_density(partial, pair.x, y) -
                        current.log_density(partial, pair.x_prime, y);
    const double cumulative = previous + step;
    // Impossible under both databases: no mass for this pair.
    if (std::isnan(cumulative)) return false;
    if (!sentinel_round) hypothetical.set_last_output(y);
    return inner_tail(next, hypothetical, pair, epsilon, cumulative) >
           delta_tilde;
  };

  if (auto atoms = current.support(partial, pair.x)) {
    double mass = 0.0;
    for (const auto& a : *atoms) {
      if (leaves_set(a.value)) mass += a.probability;
    }
    return mass;
  }
  if (auto law = current.normal_law(partial, pair.x)) {
    return internal::ExcludedNormalMass(*law, leaves_set);
  }
  throw UnsupportedMechanismError(
      "current mechanism is neither finite-support nor Gaussian");
}

// True iff delta_hat_{i+1} <= delta_tilde, i.e. for every defined ordered
// pair and every r_{i+1} the excluded mass is at most theta. `partial` is
// (r^i, y^{i-1}) and `ledger` holds l^(i-1).
inline bool delta_hat_check(const Mechanism& current, const Mechanism& next,
                            std::span<const Request> next_requests,
                            const Transcript& partial,
                            const LeakageLedger& ledger,
                            const PrivacyBudget& budget,
                            const FilterParams& params) {
  if (params.theta >= 1.0) return true;
  for (std::size_t k = 0; k < ledger.pairs().size(); ++k) {
    const double previous = ledger.value(k);
    if (std::isnan(previous)) continue;
    for (Request r : next_requests) {
      const double mass =
          excluded_mass(current, next, partial, ledger.pairs()[k], previous, r,
                        budget.epsilon, params.delta_tilde);
      if (mass > params.theta) return false;
    }
  }
  return true;
}

inline bool delta_hat_check(const Instance& instance, const Transcript& partial,
                            const LeakageLedger& ledger,
                            const PrivacyBudget& budget,
                            const FilterParams& params) {
  const int i = partial.round();
  return delta_hat_check(instance.mechanism(i), instance.mechanism(i + 1),
                         instance.requests(i + 1), partial, ledger, budget,
                         params);
}

enum class HaltReason { kDeltaHatExceeded, kMaxRoundsReached, kAdmissionRefused };

// Decides when a run stops. Both hooks see (r^i, y^{i-1}) and l^(i-1).
class StoppingRule {
 public:
  virtual ~StoppingRule() = default;

  // Before M_i runs (i >= 1). False halts without releasing y_i.
  virtual bool admit(const Instance& /*instance*/,
                     const Transcript& /*partial*/,
                     const LeakageLedger& /*previous*/) const {
    return true;
  }
  // After y_i is released (i < N). False stops before r_{i+1}.
  virtual bool accept_next(const Instance& /*instance*/,
                           const Transcript& /*partial*/,
                           const LeakageLedger& /*previous*/) const {
    return true;
  }
  virtual int max_rounds(const Instance& instance) const {
    return instance.max_rounds();
  }
};

// The delta-hat look-ahead check, evaluated generically.
class DeltaHatRule final : public StoppingRule {
 public:
  DeltaHatRule(PrivacyBudget budget, FilterParams params)
      : budget_(budget), params_(params) {}

  bool accept_next(const Instance& instance, const Transcript& partial,
                   const LeakageLedger& previous) const override {
    return delta_hat_check(instance, partial, previous, budget_, params_);
  }
  int max_rounds(const Instance& instance) const override {
    if (instance.max_rounds() < params_.max_rounds) {
      throw ConfigError("instance has fewer rounds than max_rounds");
    }
    return params_.max_rounds;
  }

  const PrivacyBudget& budget() const { return budget_; }
  const FilterParams& params() const { return params_; }

 private:
  PrivacyBudget budget_;
  FilterParams params_;
};

// The same decisions for repeated Gaussian rounds via the closed-form
// threshold: from round 1 on, continue iff every l^(i-1) entry is at most
// kappa. Round 0 has a deterministic y_0, so its check reduces to the
// single-step tail and is evaluated generically.
class GaussianThresholdRule final : public StoppingRule {
 public:
  GaussianThresholdRule(const GaussianSetting& setting, PrivacyBudget budget,
                        FilterParams params)
      : budget_(budget),
        params_(params),
        kappa_(kappa(budget.epsilon, setting, params)) {}

  bool accept_next(const Instance& instance, const Transcript& partial,
                   const LeakageLedger& previous) const override {
    if (partial.round() == 0) {
      return delta_hat_check(instance, partial, previous, budget_, params_);
    }
    return release_condition(previous, kappa_);
  }
  int max_rounds(const Instance& instance) const override {
    if (instance.max_rounds() < params_.max_rounds) {
      throw ConfigError("instance has fewer rounds than max_rounds");
    }
    return params_.max_rounds;
  }

  double kappa_value() const { return kappa_; }

 private:
  PrivacyBudget budget_;
  FilterParams params_;
  double kappa_;
};

// Halts before running M_i when, for some pair, the probability that y_i
// pushes the accrued leakage past eps exceeds delta. Not (eps, delta)-DP.
class NaiveRule final : public StoppingRule {
 public:
  explicit NaiveRule(PrivacyBudget budget) : budget_(budget) {}

  bool admit(const Instance& instance, const Transcript& partial,
             const LeakageLedger& previous) const override {
    const Mechanism& m = instance.mechanism(partial.round());
    for (std::size_t k = 0; k < previous.pairs().size(); ++k) {
      const double l = previous.value(k);
      if (std::isnan(l)) continue;
      if (inner_tail(m, partial, previous.pairs()[k], budget_.epsilon, l) >
          budget_.delta) {
        return false;
      }
    }
    return true;
  }

 private:
  PrivacyBudget budget_;
};

struct FilterRun {
  DatabaseId database;
  // T: index of the last released output.
  int stopping_time = 0;
  // (r^T, y^T).
  Transcript transcript;
  // l^(0), ..., l^(T).
  std::vector<LeakageLedger> ledgers;
  HaltReason halt_reason = HaltReason::kMaxRoundsReached;

  const LeakageLedger& final_ledger() const { return ledgers.back(); }
  bool realised_infinite_leakage() const {
    for (double v : final_ledger().values()) {
      if (v == kInf) return true;
    }
    return false;
  }
};

// Runs the filter against database x. Round i receives r_i (r_0 is the
// sentinel), releases y_i, then asks the rule whether r_{i+1} will be
// received; y_i is released whatever the answer.
inline FilterRun run_filter(DatabaseId x, const Instance& instance,
                            const Strategy& strategy, const StoppingRule& rule,
                            std::uint64_t rng_seed) {
  const int rounds = rule.max_rounds(instance);
  Rng rng(rng_seed);
  FilterRun run;
  run.database = x;
  Transcript transcript;
  LeakageLedger previous(instance.space());
  for (int i = 0;; ++i) {
    if (i > 0) {
      const Request r = strategy(transcript, instance.requests(i));
      transcript.receive(r);
      if (!rule.admit(instance, transcript, previous)) {
        run.halt_reason = HaltReason::kAdmissionRefused;
        run.transcript = Transcript(
            std::vector<Request>(transcript.requests().begin(),
                                 transcript.requests().end() - 1),
            std::vector<Output>(transcript.outputs().begin(),
                                transcript.outputs().end()));
        return run;
      }
    }
    const Mechanism& m = instance.mechanism(i);
    const Output y = m.sample(transcript, x, rng);
    LeakageLedger current = accumulate(previous, m, transcript, y);
    run.ledgers.push_back(current);
    run.stopping_time = i;

    bool stop = false;
    if (i == rounds) {
      run.halt_reason = HaltReason::kMaxRoundsReached;
      stop = true;
    } else if (!rule.accept_next(instance, transcript, previous)) {
      run.halt_reason = HaltReason::kDeltaHatExceeded;
      stop = true;
    }
    transcript.release(y);
    if (stop) {
      run.transcript = std::move(transcript);
      return run;
    }
    previous = std::move(current);
  }
}

inline FilterRun run_filter(DatabaseId x, const Instance& instance,
                            const Strategy& strategy,
                            const PrivacyBudget& budget,
                            const FilterParams& params,
                            std::uint64_t rng_seed) {
  return run_filter(x, instance, strategy, DeltaHatRule(budget, params),
                    rng_seed);
}

// L^(T)(x, x') of a completed run.
inline double full_transcript_leakage(const FilterRun& run, OrderedPair pair) {
  return run.final_ledger().at(pair);
}

// The naive filter on a repeated binary erasure instance, run against x.
inline FilterRun naive_filter_run(const Instance& erasure_instance,
                                  const PrivacyBudget& budget,
                                  std::uint64_t rng_seed) {
  const Strategy same = [](const Transcript&, std::span<const Request> allowed) {
    return allowed.front();
  };
  return run_filter(DatabaseId{0}, erasure_instance, same, NaiveRule(budget),
                    rng_seed);
}

inline FilterRun naive_filter_run(double erasure_p, const PrivacyBudget& budget,
                                  std::uint64_t rng_seed,
                                  int max_rounds = 10000) {
  return naive_filter_run(make_erasure_instance(erasure_p, max_rounds), budget,
                          rng_seed);
}

}  // namespace realfilter

#endif  // REALFILTER_REAL_FILTER_HPP_
