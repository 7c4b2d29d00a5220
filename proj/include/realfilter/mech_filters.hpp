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

// Mechanism-level privacy filters (additive, advanced, RDP) and their
// stopping times for repeated Gaussian mechanisms.

#ifndef REALFILTER_MECH_FILTERS_HPP_
#define REALFILTER_MECH_FILTERS_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"
#include "realfilter/gaussian.hpp"
#include "realfilter/numeric.hpp"

namespace realfilter {

// (eps_i, delta_i) claimed for one realised mechanism.
struct PerRoundDP {
  double epsilon_i = 0.0;
  double delta_i = 0.0;

  PerRoundDP() = default;
  PerRoundDP(double eps, double del) : epsilon_i(eps), delta_i(del) {
    if (!(epsilon_i >= 0.0)) throw DomainError("epsilon_i must be >= 0");
    if (!(delta_i >= 0.0 && delta_i <= 1.0)) {
      throw DomainError("delta_i must lie in [0, 1]");
    }
  }
};

struct RdpHistory {
  double alpha = 2.0;
  std::vector<double> rhos;
  double epsilon_alpha = 0.0;
};

enum class Decision { kContinue, kHalt };

struct FilterVerdict {
  Decision decision = Decision::kContinue;
  std::vector<std::pair<std::string, double>> diagnostics;

  bool proceeds() const { return decision == Decision::kContinue; }
};

inline FilterVerdict additive_check(std::span<const PerRoundDP> history,
                                    const PrivacyBudget& budget) {
  double eps = 0.0, del = 0.0;
  for (const auto& r : history) {
    eps += r.epsilon_i;
    del += r.delta_i;
  }
  const bool ok = eps <= budget.epsilon && del <= budget.delta;
  return {ok ? Decision::kContinue : Decision::kHalt,
          {{"epsilon_sum", eps}, {"delta_sum", del}}};
}

namespace internal {

// The advanced bound given sum eps_i (e^eps_i - 1) / 2 and sum eps_i^2.
inline double AdvancedBound(double drift, double squares, double epsilon,
                            double delta_prime) {
  const double c = 28.04 * std::log(1.0 / delta_prime);
  const double eps2 = epsilon * epsilon;
  return drift + std::sqrt(2.0 * (squares + eps2 / c)) *
                     std::sqrt((1.0 + 0.5 * std::log(c * squares / eps2 + 1.0)) *
                               std::log(2.0 / delta_prime));
}

}  // namespace internal

// The advanced-composition filter's epsilon bound with the 28.04 constant.
inline double advanced_f(std::span<const PerRoundDP> history, double epsilon,
                         double delta_prime) {
  if (!(delta_prime > 0.0 && delta_prime < 1.0)) {
    throw DomainError("delta' must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  double drift = 0.0, squares = 0.0;
  for (const auto& r : history) {
    drift += r.epsilon_i * std::expm1(r.epsilon_i) / 2.0;
    squares += r.epsilon_i * r.epsilon_i;
  }
  return internal::AdvancedBound(drift, squares, epsilon, delta_prime);
}

inline FilterVerdict advanced_check(std::span<const PerRoundDP> history,
                                    const PrivacyBudget& budget,
                                    double delta_prime) {
  double spent = delta_prime;
  for (const auto& r : history) {
    if (r.delta_i == 0.0) continue;
    if (r.epsilon_i == 0.0) {
      throw DegenerateRoundError("delta_i > 0 needs epsilon_i > 0");
    }
    spent += 2.0 * r.delta_i / (r.epsilon_i * std::exp(r.epsilon_i));
  }
  const double f = advanced_f(history, budget.epsilon, delta_prime);
  const bool ok = spent <= budget.delta && f <= budget.epsilon;
  return {ok ? Decision::kContinue : Decision::kHalt,
          {{"delta_aggregate", spent}, {"f", f}}};
}

inline FilterVerdict rdp_check(const RdpHistory& history) {
  if (!(history.alpha > 1.0)) throw DomainError("alpha must exceed 1");
  double total = 0.0;
  for (double rho : history.rhos) {
    if (!(rho >= 0.0)) throw DomainError("rho must be non-negative");
    total += rho;
  }
  return {total <= history.epsilon_alpha ? Decision::kContinue : Decision::kHalt,
          {{"rho_sum", total}}};
}

inline double rdp_to_dp(double epsilon_alpha, double alpha, double delta) {
  if (!(alpha > 1.0)) throw DomainError("alpha must exceed 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("delta must lie in (0, 1)");
  }
  return epsilon_alpha + std::log(1.0 / delta) / (alpha - 1.0);
}

// rho(alpha) of one Gaussian round.
inline double gaussian_rdp(const GaussianSetting& setting, double alpha) {
  const double ratio = setting.sensitivity() / setting.sigma();
  return alpha * ratio * ratio / 2.0;
}

// t rho(alpha) + log(1/delta) / (alpha - 1).
inline double rdp_objective(const GaussianSetting& setting, std::int64_t t,
                            double alpha, double delta) {
  return static_cast<double>(t) * gaussian_rdp(setting, alpha) +
         std::log(1.0 / delta) / (alpha - 1.0);
}

// Closed-form minimum over alpha > 1 of rdp_objective.
inline Minimum rdp_inner_minimum(const GaussianSetting& setting,
                                 std::int64_t t, double delta) {
  const double per_round = gaussian_rdp(setting, 1.0);
  const double log_inv = std::log(1.0 / delta);
  const double td = static_cast<double>(t);
  return {1.0 + std::sqrt(log_inv / (td * per_round)),
          td * per_round + 2.0 * std::sqrt(td * per_round * log_inv)};
}

namespace internal {

// Largest t >= 0 with feasible(t), for a predicate that is true up to some t
// and false afterwards. feasible(0) is taken to be true.
template <typename Pred>
std::int64_t LargestFeasible(Pred&& feasible,
                             std::int64_t cap = std::int64_t{1} << 40) {
  if (!feasible(1)) return 0;
  std::int64_t lo = 1, hi = 2;
  while (hi <= cap && feasible(hi)) {
    lo = hi;
    hi *= 2;
  }
  if (hi > cap) return lo;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (feasible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

inline void RequireDelta(const PrivacyBudget& budget) {
  if (!(budget.delta > 0.0 && budget.delta < 1.0)) {
    throw DomainError("delta must lie in (0, 1)");
  }
}

}  // namespace internal

// T_a: eps_i(delta_i) decreases in delta_i, so the inner minimum over
// delta_i <= delta / t sits at delta_i = delta / t.
inline std::int64_t stopping_time_additive(const GaussianSetting& setting,
                                           const PrivacyBudget& budget) {
  internal::RequireDelta(budget);
  return internal::LargestFeasible([&](std::int64_t t) {
    const double td = static_cast<double>(t);
    return gaussian_privacy_curve(setting, budget.delta / td) <=
           budget.epsilon / td;
  });
}

// Resolution of the advanced filter's inner search over (delta_i, delta').
struct AdvancedSearch {
  int delta_i_points = 64;
  int delta_prime_points = 32;
  double log_tolerance = 1e-7;
};

// Minimum over (delta_i, delta') of the advanced bound for t identical
// rounds subject to delta' + 2 t delta_i / (eps_i e^eps_i) <= delta.
// Returns +inf when no pair is feasible.
inline double advanced_minimum(const GaussianSetting& setting,
                               const PrivacyBudget& budget, std::int64_t t,
                               const AdvancedSearch& search = {}) {
  internal::RequireDelta(budget);
  if (!(budget.epsilon > 0.0)) return kInf;
  const double td = static_cast<double>(t);
  const double at_zero = gaussian_delta(setting, 0.0);

  auto best_for = [&](double log_delta_i) {
    const double delta_i = std::exp(log_delta_i);
    const double eps_i = gaussian_privacy_curve(setting, delta_i);
    if (eps_i <= 0.0) return kInf;
    const double remaining =
        budget.delta - 2.0 * td * delta_i / (eps_i * std::exp(eps_i));
    if (!(remaining > 0.0)) return kInf;
    const double top = std::log(std::min(remaining, 1.0 - 1e-12));
    const double drift = td * eps_i * std::expm1(eps_i) / 2.0;
    const double squares = td * eps_i * eps_i;
    auto f_of = [&](double log_dp) {
      return internal::AdvancedBound(drift, squares, budget.epsilon,
                                     std::exp(log_dp));
    };
    return grid_refine_minimize(f_of, top - 40.0, top,
                                search.delta_prime_points,
                                search.log_tolerance)
        .value;
  };

  const double hi = std::log(std::min(at_zero, 1.0)) - 1e-12;
  const double lo = std::log(budget.delta) - 30.0;
  if (!(hi > lo)) return kInf;
  return grid_refine_minimize(best_for, lo, hi, search.delta_i_points,
                              search.log_tolerance)
      .value;
}

inline std::int64_t stopping_time_advanced(const GaussianSetting& setting,
                                           const PrivacyBudget& budget,
                                           const AdvancedSearch& search = {}) {
  internal::RequireDelta(budget);
  return internal::LargestFeasible([&](std::int64_t t) {
    return advanced_minimum(setting, budget, t, search) <= budget.epsilon;
  });
}

inline std::int64_t stopping_time_rdp(const GaussianSetting& setting,
                                      const PrivacyBudget& budget) {
  internal::RequireDelta(budget);
  return internal::LargestFeasible([&](std::int64_t t) {
    return rdp_inner_minimum(setting, t, budget.delta).value <= budget.epsilon;
  });
}

}  // namespace realfilter

#endif  // REALFILTER_MECH_FILTERS_HPP_
