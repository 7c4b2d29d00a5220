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

// Exact transcript distributions on small finite instances, the DP gap, and
// a Monte Carlo cross-check of the Gaussian leakage tail.

#ifndef REALFILTER_VERIFY_HPP_
#define REALFILTER_VERIFY_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"
#include "realfilter/gaussian.hpp"
#include "realfilter/pure_dp.hpp"
#include "realfilter/real_filter.hpp"

namespace realfilter {

struct TranscriptDistribution {
  DatabaseId database;
  std::map<Transcript, double> atoms;

  double total() const {
    double s = 0.0;
    for (const auto& [t, p] : atoms) s += p;
    return s;
  }
  double probability(const Transcript& t) const {
    auto it = atoms.find(t);
    return it == atoms.end() ? 0.0 : it->second;
  }
};

inline constexpr std::size_t kDefaultAtomBudget = 1'000'000;

// P_x over full transcripts by depth-first expansion. Outputs are taken
// from the union of supports across databases, so every database yields
// the same atom universe (zero-probability atoms included).
inline TranscriptDistribution enumerate_transcripts(
    DatabaseId x, const Instance& instance, const Strategy& strategy,
    const StoppingRule& rule, std::size_t atom_budget = kDefaultAtomBudget) {
  const int rounds = rule.max_rounds(instance);
  TranscriptDistribution dist{x, {}};
  auto emit = [&](const Transcript& t, double p) {
    dist.atoms[t] += p;
    if (dist.atoms.size() > atom_budget) {
      throw AtomBudgetExceededError("transcript tree exceeds the atom budget");
    }
  };

  std::function<void(const Transcript&, const LeakageLedger&, double)> expand =
      [&](const Transcript& partial, const LeakageLedger& previous,
          double mass) {
        const int i = partial.round();
        if (i > 0 && !rule.admit(instance, partial, previous)) {
          emit(Transcript(std::vector<Request>(partial.requests().begin(),
                                               partial.requests().end() - 1),
                          std::vector<Output>(partial.outputs().begin(),
                                              partial.outputs().end())),
               mass);
          return;
        }
        const Mechanism& m = instance.mechanism(i);
        // The continuation decision cannot depend on y_i.
        const bool go_on =
            i < rounds && rule.accept_next(instance, partial, previous);
        std::map<Output, double> own;
        const auto atoms = m.support(partial, x);
        if (!atoms) {
          throw UnsupportedMechanismError("enumeration needs finite support");
        }
        for (const auto& a : *atoms) own[a.value] = a.probability;
        for (Output y : internal::UnionSupport(m, partial, instance.space())) {
          auto it = own.find(y);
          const double p = mass * (it == own.end() ? 0.0 : it->second);
          Transcript full = partial.with_output(y);
          if (!go_on) {
            emit(full, p);
            continue;
          }
          const Request r = strategy(full, instance.requests(i + 1));
          expand(full.with_request(r), accumulate(previous, m, partial, y), p);
        }
      };
  expand(Transcript(), LeakageLedger(instance.space()), 1.0);
  return dist;
}

// sup_S P_x(S) - e^eps P_x'(S), i.e. the positive part summed over atoms.
inline double dp_gap(const TranscriptDistribution& dist_x,
                     const TranscriptDistribution& dist_x_prime,
                     double epsilon) {
  if (dist_x.atoms.size() != dist_x_prime.atoms.size()) {
    throw MismatchedUniverseError("distributions have different atom sets");
  }
  const double scale = std::exp(epsilon);
  double gap = 0.0;
  auto it = dist_x_prime.atoms.begin();
  for (const auto& [t, p] : dist_x.atoms) {
    if (it->first != t) {
      throw MismatchedUniverseError("distributions have different atom sets");
    }
    const double q = it->second;
    const double excess = q == 0.0 ? p : p - scale * q;
    if (excess > 0.0) gap += excess;
    ++it;
  }
  return gap;
}

struct PairGap {
  OrderedPair pair;
  double gap = 0.0;
};

// dp_gap for both orderings of every neighbour pair.
inline std::vector<PairGap> instance_gaps(const Instance& instance,
                                          const Strategy& strategy,
                                          const StoppingRule& rule,
                                          double epsilon,
                                          std::size_t atom_budget =
                                              kDefaultAtomBudget) {
  std::vector<TranscriptDistribution> dists;
  for (const DatabaseId& x : instance.space().databases()) {
    dists.push_back(
        enumerate_transcripts(x, instance, strategy, rule, atom_budget));
  }
  std::vector<PairGap> out;
  for (const auto& pair : instance.space().ordered_pairs()) {
    out.push_back({pair, dp_gap(dists[pair.x.value], dists[pair.x_prime.value],
                                epsilon)});
  }
  return out;
}

struct TailCheck {
  double empirical = 0.0;
  double analytic = 0.0;
  double standard_error = 0.0;
};

// Empirical P_x(L > headroom) from sampled Gaussian outputs against the
// closed form.
inline TailCheck mc_tail_check(const GaussianSetting& setting, double headroom,
                               std::size_t samples, std::uint64_t rng_seed) {
  if (samples < 100'000) throw DomainError("at least 1e5 samples required");
  const OrderedPair pair{DatabaseId{0}, DatabaseId{1}};
  const auto mech = setting.mechanism();
  const Mechanism& m = *mech;
  const Transcript partial = Transcript().with_output(kSentinelOutput)
                                 .with_request(Request{0});
  Rng rng(rng_seed);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Output y = m.sample(partial, pair.x, rng);
    if (step_leakage(m, partial, y, pair) > headroom) ++hits;
  }
  TailCheck out;
  out.empirical = static_cast<double>(hits) / static_cast<double>(samples);
  out.analytic = *m.leakage_tail(partial, pair, headroom);
  out.standard_error = std::sqrt(out.analytic * (1.0 - out.analytic) /
                                 static_cast<double>(samples));
  return out;
}

}  // namespace realfilter

#endif  // REALFILTER_VERIFY_HPP_
