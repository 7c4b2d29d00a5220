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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "realfilter/real_filter.hpp"
#include "realfilter/strategies.hpp"
#include "realfilter/verify.hpp"

namespace realfilter {
namespace {

const OrderedPair kXY{DatabaseId{0}, DatabaseId{1}};
const OrderedPair kYX{DatabaseId{1}, DatabaseId{0}};

Transcript RoundOnePartial() {
  return Transcript().with_output(kSentinelOutput).with_request(Request{0});
}

// Ledger at round i-1 with l(x, x') = v.
LeakageLedger LedgerWith(double v, int round) {
  LeakageLedger l(DatabaseSpace::TwoDatabases());
  l.set(kXY, v);
  l.set_round(round);
  return l;
}

// Partial transcript (r^i, y^{i-1}) of a repeated Gaussian instance.
Transcript GaussianPartial(int i) {
  Transcript t;
  for (int k = 0; k < i; ++k) {
    t.release(k == 0 ? kSentinelOutput : 0.3 * k);
    t.receive(Request{0});
  }
  return t;
}

// Excluded mass for the Gaussian instance from a 50-digit half-line
// computation: l_i(y) is affine in y, so the excluded set is a half-line
// whose cut is found by bisection.
double ExcludedMassOracle(double sigma, double eps, double previous,
                          double delta_tilde) {
  using oracle::Big;
  const Big s(sigma);
  auto tail = [&](const Big& cumulative) {
    // P(L > eps - cumulative), L ~ N(1/(2 s^2), 1/s^2).
    return oracle::Cdf(-((Big(eps) - cumulative) * s - 1 / (2 * s)));
  };
  // Under x (mean 0): l(y) = (1 - 2y) / (2 s^2), decreasing in y; the
  // excluded set is y < cut.
  auto leak = [&](const Big& y) { return (1 - 2 * y) / (2 * s * s); };
  Big lo(-1000), hi(1000);
  if (!(tail(Big(previous) + leak(lo)) > delta_tilde)) return 0.0;
  if (tail(Big(previous) + leak(hi)) > delta_tilde) return 1.0;
  for (int it = 0; it < 300; ++it) {
    Big mid = (lo + hi) / 2;
    if (tail(Big(previous) + leak(mid)) > delta_tilde) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(oracle::Cdf(lo / s));
}

TEST(InnerTail, InfiniteHeadroomIsZero) {
  const Instance e = make_erasure_instance(0.3, 2);
  EXPECT_EQ(inner_tail(e.mechanism(1), RoundOnePartial(), kXY, kInf, 0.0), 0.0);
  const Instance g = make_gaussian_instance(2.0, 2);
  EXPECT_EQ(inner_tail(g.mechanism(1), RoundOnePartial(), kXY, kInf, 0.0), 0.0);
}

TEST(InnerTail, ErasureWithFiniteHeadroomIsP) {
  const Instance e = make_erasure_instance(0.01, 2);
  for (double l : {-3.0, 0.0, 0.9}) {
    EXPECT_DOUBLE_EQ(inner_tail(e.mechanism(1), RoundOnePartial(), kXY, 1.0, l),
                     0.01);
  }
  // Past the budget even the erasure symbol (leakage 0) exceeds it.
  for (double l : {1.5, kInf}) {
    EXPECT_DOUBLE_EQ(inner_tail(e.mechanism(1), RoundOnePartial(), kXY, 1.0, l),
                     1.0);
  }
}

TEST(InnerTail, GaussianClosedForm) {
  const Instance g = make_gaussian_instance(2.0, 2);
  for (double h : {-1.0, 0.0, 0.125, 1.0, 3.0}) {
    EXPECT_NEAR(inner_tail(g.mechanism(1), RoundOnePartial(), kXY, h, 0.0),
                oracle::Sf(2.0 * h - 0.25), 1e-15)
        << h;
  }
  EXPECT_NEAR(inner_tail(g.mechanism(1), RoundOnePartial(), kXY, 1.0, 0.0),
              0.040059156863817090419, 1e-15);
}

TEST(InnerTail, GaussianAgreesWithMonteCarlo) {
  const GaussianSetting s(2.0);
  for (double h : {0.0, 0.5, 1.0, 2.0}) {
    const TailCheck c = mc_tail_check(s, h, 10'000'000,
                                      static_cast<std::uint64_t>(99 + 4 * h));
    EXPECT_NEAR(c.empirical, c.analytic, 4.0 * c.standard_error) << h;
  }
}

class NoTailMechanism final : public Mechanism {
 public:
  Output sample(const Transcript&, DatabaseId, Rng&) const override {
    return 0.0;
  }
  double log_density(const Transcript&, DatabaseId, Output) const override {
    return 0.0;
  }
};

TEST(InnerTail, UnsupportedMechanism) {
  NoTailMechanism m;
  EXPECT_THROW(inner_tail(m, RoundOnePartial(), kXY, 1.0, 0.0),
               UnsupportedMechanismError);
}

TEST(DeltaHatCheck, TrivialParameters) {
  const Instance e = make_erasure_instance(0.5, 3);
  const PrivacyBudget b(0.1, 1.0);
  // Already revealed: every output leaves the set unless theta or delta
  // tilde is trivial.
  const LeakageLedger l = LedgerWith(kInf, 0);
  EXPECT_TRUE(delta_hat_check(e, RoundOnePartial(), l, b,
                              FilterParams(0.0, 1.0, 1, b)));
  EXPECT_TRUE(delta_hat_check(e, RoundOnePartial(), l, b,
                              FilterParams(1.0, 0.0, 1, b)));
  EXPECT_FALSE(delta_hat_check(e, RoundOnePartial(), l, b,
                               FilterParams(0.5, 0.5 / 3, 3, b)));
}

TEST(DeltaHatCheck, ErasureContinuesUntilRevealed) {
  const Instance e = make_erasure_instance(0.01, 8);
  const PrivacyBudget b(1.0, 0.1);
  const FilterParams p(0.01, 0.01, 8, b);
  EXPECT_TRUE(delta_hat_check(e, RoundOnePartial(), LedgerWith(0.0, 0), b, p));
  EXPECT_FALSE(
      delta_hat_check(e, RoundOnePartial(), LedgerWith(kInf, 0), b, p));
  // p above theta: the reveal mass alone is too much.
  const Instance e2 = make_erasure_instance(0.02, 8);
  EXPECT_FALSE(delta_hat_check(e2, RoundOnePartial(), LedgerWith(0.0, 0), b, p));
}

TEST(DeltaHatCheck, GaussianExcludedMassMatchesHalfLineOracle) {
  const Instance g = make_gaussian_instance(2.0, 3);
  const Transcript partial = GaussianPartial(2);
  for (double prev : {-2.0, 0.0, 3.0, 6.5, 7.9, 9.0}) {
    for (double dt : {1e-6, 5.6e-4, 0.05}) {
      const double got = excluded_mass(g.mechanism(2), g.mechanism(3), partial,
                                       kXY, prev, Request{0}, 12.0, dt);
      const double want = ExcludedMassOracle(2.0, 12.0, prev, dt);
      EXPECT_NEAR(got, want, 1e-14 + 1e-9 * want) << prev << ' ' << dt;
    }
  }
}

TEST(DeltaHatCheck, GaussianDecisionsMatchThresholdRule) {
  const GaussianSetting s(2.0);
  const Instance g = s.instance(48);
  const PrivacyBudget b(12.0, 1e-3);
  const FilterParams p = optimize_params(48, b);
  const double k = kappa(12.0, s, p);
  const Transcript partial = GaussianPartial(5);
  for (int j = 0; j < 1000; ++j) {
    const double v = k - 1.0 + 2.0 * j / 999.0;
    const LeakageLedger l = LedgerWith(v, 4);
    ASSERT_EQ(delta_hat_check(g, partial, l, b, p), release_condition(l, k))
        << v;
  }
}

TEST(DeltaHatCheck, DecisionIgnoresTheReleasedOutput) {
  // The check reads (r^i, y^{i-1}); swapping y_i for any other support
  // point cannot change it.
  const Instance e = make_erasure_instance(0.01, 4);
  const PrivacyBudget b(1.0, 0.1);
  const FilterParams p(0.01, 0.01, 4, b);
  const DeltaHatRule rule(b, p);
  Transcript t = RoundOnePartial();
  for (Output y1 : {0.0, 2.0}) {
    for (double prev : {0.0, kInf}) {
      const LeakageLedger l = LedgerWith(prev, 0);
      const bool base = rule.accept_next(e, t, l);
      for (Output y : {0.0, 2.0}) {
        const Transcript full = t.with_output(y);
        EXPECT_EQ(rule.accept_next(e, full.without_last_output(), l), base);
      }
    }
    t = t.with_output(y1).with_request(Request{0});
  }
}

TEST(RunFilter, ZeroLeakageReachesMaxRounds) {
  const Instance e = make_erasure_instance(0.0, 6);
  const PrivacyBudget b(0.0, 0.1);
  const FilterParams p(0.05, 0.05 / (6 * 0.95), 6, b);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FilterRun run = run_filter(DatabaseId{seed % 2 ? 1 : 0}, e,
                                     fixed_strategy(0), b, p, seed);
    EXPECT_EQ(run.stopping_time, 6);
    EXPECT_EQ(run.halt_reason, HaltReason::kMaxRoundsReached);
    EXPECT_EQ(full_transcript_leakage(run, kXY), 0.0);
  }
}

TEST(RunFilter, RecordsReleasedOutputOnHalt) {
  // Erasure with p = theta: a reveal in round i makes every y_{i+1}
  // excluded, so the check after round i+1 fails and y_{i+1} is still part
  // of the transcript.
  const Instance e = make_erasure_instance(0.01, 8);
  const PrivacyBudget b(1.0, 0.1);
  const FilterParams p(0.01, 0.01, 8, b);
  int halted = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const FilterRun run = run_filter(DatabaseId{0}, e, fixed_strategy(0), b, p,
                                     seed);
    ASSERT_EQ(run.transcript.round(), run.stopping_time);
    ASSERT_FALSE(run.transcript.is_partial());
    ASSERT_EQ(static_cast<int>(run.ledgers.size()), run.stopping_time + 1);
    if (run.halt_reason == HaltReason::kDeltaHatExceeded) {
      ++halted;
      ASSERT_GE(run.stopping_time, 2);
      EXPECT_EQ(run.transcript.output(run.stopping_time - 1), 0.0);
      EXPECT_EQ(full_transcript_leakage(run, kXY), kInf);
    } else {
      EXPECT_EQ(run.stopping_time, 8);
    }
  }
  EXPECT_GT(halted, 50);
}

TEST(RunFilter, ThetaBelowRevealProbabilityStopsAfterFirstOutput) {
  const Instance e = make_erasure_instance(0.01, 400);
  const PrivacyBudget b(1.0, 0.1);
  const FilterParams p(0.01, 0.09 / (400 * 0.99), 400, b);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FilterRun run = run_filter(DatabaseId{0}, e, fixed_strategy(0), b, p,
                                     seed);
    EXPECT_EQ(run.stopping_time, 1);
    EXPECT_EQ(run.halt_reason, HaltReason::kDeltaHatExceeded);
  }
}

TEST(RunFilter, TwoRoundLeakageIsSumOfSteps) {
  const Instance g = make_gaussian_instance(1.0, 2);
  const PrivacyBudget b(100.0, 0.1);
  const FilterParams p(0.05, 0.025, 2, b);
  const FilterRun run = run_filter(DatabaseId{1}, g, fixed_strategy(0), b, p, 3);
  ASSERT_EQ(run.stopping_time, 2);
  double sum = 0.0;
  Transcript t;
  for (int i = 0; i <= 2; ++i) {
    if (i > 0) t.receive(Request{0});
    sum += step_leakage(g.mechanism(i), t, run.transcript.output(i), kXY);
    t.release(run.transcript.output(i));
  }
  EXPECT_NEAR(full_transcript_leakage(run, kXY), sum, 1e-14);
  EXPECT_EQ(full_transcript_leakage(run, kXY),
            -full_transcript_leakage(run, kYX));
}

TEST(RunFilter, NothingReleasedGivesZeroLeakage) {
  // delta_tilde too small for even one Gaussian round: T = 0.
  const Instance g = make_gaussian_instance(0.1, 3);
  const PrivacyBudget b(0.5, 1e-3);
  const FilterParams p(1e-4, 1e-4, 3, b);
  const FilterRun run = run_filter(DatabaseId{0}, g, fixed_strategy(0), b, p, 1);
  EXPECT_EQ(run.stopping_time, 0);
  EXPECT_EQ(full_transcript_leakage(run, kXY), 0.0);
}

TEST(RunFilter, GaussianRunsMatchThresholdRule) {
  const GaussianSetting s(2.0);
  const Instance g = s.instance(48);
  const PrivacyBudget b(12.0, 1e-3);
  const FilterParams p = optimize_params(48, b);
  const double k = kappa(12.0, s, p);
  const DeltaHatRule generic(b, p);
  const GaussianThresholdRule fast(s, b, p);
  for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
    const FilterRun a = run_filter(DatabaseId{0}, g, fixed_strategy(0), generic,
                                   seed);
    const FilterRun c = run_filter(DatabaseId{0}, g, fixed_strategy(0), fast,
                                   seed);
    ASSERT_EQ(a.stopping_time, c.stopping_time) << seed;
    ASSERT_LE(a.stopping_time, 48);
    // First round where the threshold rule fires.
    int expected = 48;
    for (int i = 1; i < 48; ++i) {
      if (!release_condition(a.ledgers[i - 1], k)) {
        expected = i;
        break;
      }
    }
    ASSERT_EQ(a.stopping_time, expected) << seed;
  }
}

TEST(NaiveFilter, NoRevealMeansNoLeakage) {
  const FilterRun run = naive_filter_run(0.0, PrivacyBudget(1.0, 0.1), 1, 200);
  EXPECT_EQ(run.stopping_time, 200);
  EXPECT_EQ(full_transcript_leakage(run, kXY), 0.0);
  EXPECT_FALSE(run.realised_infinite_leakage());
}

TEST(NaiveFilter, StopsRightAfterTheReveal) {
  const PrivacyBudget b(1.0, 0.1);
  const Instance e = make_erasure_instance(0.05, 2000);
  std::map<int, int> stops;
  const int n = 100'000;
  for (int k = 0; k < n; ++k) {
    const FilterRun run = naive_filter_run(e, b, 1000 + k);
    ASSERT_TRUE(run.realised_infinite_leakage());
    ASSERT_EQ(run.halt_reason, HaltReason::kAdmissionRefused);
    ASSERT_EQ(run.transcript.output(run.stopping_time), 0.0);
    ++stops[run.stopping_time];
  }
  // Geometric law with success probability p on {1, 2, ...}.
  for (int t = 1; t <= 20; ++t) {
    const double want = std::pow(0.95, t - 1) * 0.05;
    const double got = static_cast<double>(stops[t]) / n;
    EXPECT_NEAR(got, want, 4.0 * std::sqrt(want * (1 - want) / n)) << t;
  }
}

}  // namespace
}  // namespace realfilter
