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

// Pure-DP accounting on finite instances: classical composition, the
// additive filter on realised mechanisms, and the realisation-level
// continuation bound, all as finite enumerations.

#ifndef REALFILTER_PURE_DP_HPP_
#define REALFILTER_PURE_DP_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"

namespace realfilter {

namespace internal {

// Outputs with positive probability under some database.
inline std::vector<Output> UnionSupport(const Mechanism& m,
                                        const Transcript& partial,
                                        const DatabaseSpace& space) {
  std::vector<Output> out;
  for (const DatabaseId& x : space.databases()) {
    auto atoms = m.support(partial, x);
    if (!atoms) {
      throw UnsupportedMechanismError("pure-DP accounting needs finite support");
    }
    for (const auto& a : *atoms) out.push_back(a.value);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// l(x, x') at y, or -inf when y is impossible under x.
inline double Leak(const Mechanism& m, const Transcript& partial,
                   OrderedPair pair, Output y) {
  const double a = m.log_density(partial, pair.x, y);
  if (a == -kInf) return -kInf;
  return a - m.log_density(partial, pair.x_prime, y);
}

// sup over y of l(x, x') for one pair.
inline double SupLeak(const Mechanism& m, const Transcript& partial,
                      const DatabaseSpace& space, OrderedPair pair) {
  double best = -kInf;
  for (Output y : UnionSupport(m, partial, space)) {
    best = std::max(best, Leak(m, partial, pair, y));
  }
  return best;
}

// The per-round pure-DP parameter: sup over y and pairs.
inline double SupLeak(const Mechanism& m, const Transcript& partial,
                      const DatabaseSpace& space) {
  double best = -kInf;
  for (const auto& pair : space.ordered_pairs()) {
    best = std::max(best, SupLeak(m, partial, space, pair));
  }
  return best;
}

// Calls f on every partial transcript (r^i, y^{i-1}) reachable at round i.
inline void ForEachHistory(const Instance& instance, int i,
                           const std::function<void(const Transcript&)>& f) {
  std::function<void(const Transcript&, int)> walk =
      [&](const Transcript& full, int round) {
        for (Request r : instance.requests(round + 1)) {
          Transcript partial = full.with_request(r);
          if (round + 1 == i) {
            f(partial);
            continue;
          }
          const Mechanism& m = instance.mechanism(round + 1);
          for (Output y : UnionSupport(m, partial, instance.space())) {
            walk(partial.with_output(y), round + 1);
          }
        }
      };
  if (i == 0) {
    f(Transcript());
    return;
  }
  walk(Transcript().with_output(kSentinelOutput), 0);
}

inline Transcript PartialAt(const Transcript& realised, int i) {
  if (realised.round() < i) {
    throw ConfigError("realised transcript is shorter than the round asked for");
  }
  return Transcript(
      std::vector<Request>(realised.requests().begin(),
                           realised.requests().begin() + i + 1),
      std::vector<Output>(realised.outputs().begin(),
                          realised.outputs().begin() + i));
}

inline void RequireRound(const Instance& instance, int t) {
  if (t < 1 || t > instance.max_rounds()) {
    throw DomainError("t must lie in 1..N");
  }
}

// sup over (r_t, y_{t-1}, y_t) of l_{t-1}(x, x') + l_t(x, x') given the
// realised (r^{t-1}, y^{t-2}); for t = 1 only l_1 is free.
inline double SupLastTwo(const Instance& instance, const Transcript& realised,
                         int t, OrderedPair pair) {
  const DatabaseSpace& space = instance.space();
  auto last = [&](const Transcript& full_prev) {
    double best = -kInf;
    for (Request r : instance.requests(t)) {
      best = std::max(best, SupLeak(instance.mechanism(t),
                                    full_prev.with_request(r), space, pair));
    }
    return best;
  };
  if (t == 1) return last(Transcript().with_output(kSentinelOutput));
  const Transcript before = PartialAt(realised, t - 1);
  const Mechanism& m = instance.mechanism(t - 1);
  double best = -kInf;
  for (Output y : UnionSupport(m, before, space)) {
    const double first = Leak(m, before, pair, y);
    if (first == -kInf) continue;
    best = std::max(best, first + last(before.with_output(y)));
  }
  return best;
}

}  // namespace internal

// eps_C^t: per-round sups over every history, output and pair.
inline double eps_classical(const Instance& instance, int t) {
  internal::RequireRound(instance, t);
  double total = 0.0;
  for (int i = 1; i <= t; ++i) {
    double round_sup = -kInf;
    internal::ForEachHistory(instance, i, [&](const Transcript& h) {
      round_sup = std::max(round_sup, internal::SupLeak(instance.mechanism(i),
                                                        h, instance.space()));
    });
    total += round_sup;
  }
  return total;
}

// eps_M^t: per-round sups of the mechanisms the realised transcript ran.
inline double eps_mechanism(const Instance& instance,
                            const Transcript& realised, int t) {
  internal::RequireRound(instance, t);
  double total = 0.0;
  for (int i = 1; i <= t; ++i) {
    total += internal::SupLeak(instance.mechanism(i),
                               internal::PartialAt(realised, i),
                               instance.space());
  }
  return total;
}

// eps_R^t: worst pair of realised leakage through t-2 plus the worst
// two-step continuation.
inline double eps_realisation(const Instance& instance,
                              const Transcript& realised, int t) {
  internal::RequireRound(instance, t);
  double best = -kInf;
  for (const auto& pair : instance.space().ordered_pairs()) {
    double realised_sum = 0.0;
    for (int i = 1; i <= t - 2; ++i) {
      realised_sum += internal::Leak(instance.mechanism(i),
                                     internal::PartialAt(realised, i), pair,
                                     realised.output(i));
    }
    if (std::isnan(realised_sum)) continue;
    best = std::max(best, realised_sum +
                              internal::SupLastTwo(instance, realised, t, pair));
  }
  return best;
}

struct AbcTerms {
  OrderedPair pair;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double sum() const { return a + b + c; }
};

struct AbcResult {
  std::vector<AbcTerms> terms;
  bool holds = true;
};

// Decomposition of eps_M^t - eps_R^t per pair; A + B + C >= 0 for every
// pair is sufficient for eps_M^t >= eps_R^t.
inline AbcResult abc_condition(const Instance& instance,
                               const Transcript& realised, int t) {
  internal::RequireRound(instance, t);
  const DatabaseSpace& space = instance.space();
  std::vector<double> eps_prime(t + 1, 0.0);
  for (int i = 1; i <= t; ++i) {
    eps_prime[i] = internal::SupLeak(instance.mechanism(i),
                                     internal::PartialAt(realised, i), space);
  }
  AbcResult result;
  for (const auto& pair : space.ordered_pairs()) {
    AbcTerms terms{pair};
    for (int i = 1; i <= t - 2; ++i) {
      terms.a += eps_prime[i] -
                 internal::Leak(instance.mechanism(i),
                                internal::PartialAt(realised, i), pair,
                                realised.output(i));
    }
    if (t >= 2) {
      terms.b = eps_prime[t - 1] -
                internal::SupLeak(instance.mechanism(t - 1),
                                  internal::PartialAt(realised, t - 1), space,
                                  pair);
    }
    // sup over (r_t, y_{t-1}, y_t) of l_t alone.
    double sup_last = -kInf;
    if (t == 1) {
      sup_last = internal::SupLastTwo(instance, realised, 1, pair);
    } else {
      const Transcript before = internal::PartialAt(realised, t - 1);
      const Mechanism& m = instance.mechanism(t - 1);
      for (Output y : internal::UnionSupport(m, before, space)) {
        if (internal::Leak(m, before, pair, y) == -kInf) continue;
        for (Request r : instance.requests(t)) {
          sup_last = std::max(
              sup_last,
              internal::SupLeak(instance.mechanism(t),
                                before.with_output(y).with_request(r), space,
                                pair));
        }
      }
    }
    terms.c = eps_prime[t] - sup_last;
    if (!(terms.sum() >= 0.0)) result.holds = false;
    result.terms.push_back(terms);
  }
  return result;
}

}  // namespace realfilter

#endif  // REALFILTER_PURE_DP_HPP_
