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
#include <random>

#include "realfilter/core.hpp"
#include "realfilter/mechanisms.hpp"

namespace realfilter {
namespace {

const OrderedPair kXY{DatabaseId{0}, DatabaseId{1}};
const OrderedPair kYX{DatabaseId{1}, DatabaseId{0}};

TEST(DatabaseSpace, RejectsBadRelations) {
  EXPECT_THROW(DatabaseSpace({"a", "b"}, {{0, 0}}), ConfigError);
  EXPECT_THROW(DatabaseSpace({"a", "b"}, {{0, 2}}), ConfigError);
  EXPECT_THROW(DatabaseSpace({"a", "b"}, {}), ConfigError);
  EXPECT_THROW(DatabaseSpace({}, {}), ConfigError);
}

TEST(DatabaseSpace, NeighbourRelationIsSymmetric) {
  DatabaseSpace s({"a", "b", "c"}, {{0, 1}, {2, 1}});
  EXPECT_TRUE(s.are_neighbours(DatabaseId{1}, DatabaseId{2}));
  EXPECT_TRUE(s.are_neighbours(DatabaseId{2}, DatabaseId{1}));
  EXPECT_FALSE(s.are_neighbours(DatabaseId{0}, DatabaseId{2}));
  EXPECT_FALSE(s.are_neighbours(DatabaseId{0}, DatabaseId{0}));
  EXPECT_EQ(s.ordered_pairs().size(), 4u);
  EXPECT_EQ(*s.find("c"), DatabaseId{2});
  EXPECT_FALSE(s.find("d").has_value());
}

TEST(Transcript, KindsAndSentinels) {
  Transcript t;
  EXPECT_TRUE(t.is_partial());
  EXPECT_EQ(t.round(), 0);
  EXPECT_EQ(t.current_request(), kSentinelRequest);
  t.release(kSentinelOutput);
  EXPECT_FALSE(t.is_partial());
  EXPECT_EQ(t.requests().size(), t.outputs().size());
  t.receive(Request{3});
  EXPECT_EQ(t.round(), 1);
  EXPECT_EQ(t.requests().size(), t.outputs().size() + 1);
  EXPECT_THROW(t.receive(Request{1}), ConfigError);
  t.release(2.0);
  EXPECT_THROW(t.release(2.0), ConfigError);
  EXPECT_EQ(t.without_last_output().round(), 1);
  EXPECT_TRUE(t.without_last_output().is_partial());
}

TEST(Transcript, ValidatesConstruction) {
  EXPECT_THROW(Transcript({Request{0}}, {}), ConfigError);
  EXPECT_THROW(Transcript({kSentinelRequest}, {1.0}), ConfigError);
  EXPECT_THROW(Transcript({kSentinelRequest}, {kSentinelOutput, 1.0}),
               ConfigError);
  EXPECT_NO_THROW(Transcript({kSentinelRequest, Request{0}},
                             {kSentinelOutput, 1.0}));
}

TEST(StepLeakage, IdenticalDistributionsLeakNothing) {
  const Instance inst = make_erasure_instance(0.0, 1);
  const Transcript partial = Transcript().with_output(kSentinelOutput)
                                 .with_request(Request{0});
  EXPECT_EQ(step_leakage(inst.mechanism(1), partial, erasure_symbol(2), kXY),
            0.0);
}

TEST(StepLeakage, GaussianMidpointIsZero) {
  const Instance inst = make_gaussian_instance(2.0, 1);
  const Transcript partial = Transcript().with_output(kSentinelOutput)
                                 .with_request(Request{0});
  EXPECT_NEAR(step_leakage(inst.mechanism(1), partial, 0.5, kXY), 0.0, 1e-15);
}

TEST(StepLeakage, ErasureRevealIsInfinite) {
  const Instance inst = make_erasure_instance(0.1, 1);
  const Transcript partial = Transcript().with_output(kSentinelOutput)
                                 .with_request(Request{0});
  EXPECT_EQ(step_leakage(inst.mechanism(1), partial, 0.0, kXY), kInf);
  EXPECT_EQ(step_leakage(inst.mechanism(1), partial, 0.0, kYX), -kInf);
  EXPECT_THROW(step_leakage(inst.mechanism(1), partial, 7.0, kXY),
               UndefinedLeakageError);
}

TEST(Accumulate, GaussianRoundAtTheMeanOfX) {
  const Instance inst = make_gaussian_instance(2.0, 1);
  const Transcript partial = Transcript().with_output(kSentinelOutput)
                                 .with_request(Request{0});
  LeakageLedger l(inst.space());
  l = accumulate(l, inst.mechanism(0), Transcript(), kSentinelOutput);
  EXPECT_EQ(l.at(kXY), 0.0);
  l = accumulate(l, inst.mechanism(1), partial, 0.0);
  // ((y - 1)^2 - y^2) / (2 sigma^2) at y = 0.
  EXPECT_NEAR(l.at(kXY), 0.125, 1e-15);
  EXPECT_NEAR(l.at(kYX), -0.125, 1e-15);
  EXPECT_EQ(l.round(), 1);
}

TEST(Accumulate, RejectsOutOfOrderRounds) {
  const Instance inst = make_gaussian_instance(2.0, 2);
  LeakageLedger l(inst.space());
  const Transcript partial = Transcript().with_output(kSentinelOutput)
                                 .with_request(Request{0});
  EXPECT_THROW(accumulate(l, inst.mechanism(1), partial, 0.0), ConfigError);
}

TEST(Accumulate, ImpossibleUnderBothBecomesNaN) {
  const Instance inst = make_erasure_instance(0.2, 1, 3);
  const Transcript partial = Transcript().with_output(kSentinelOutput)
                                 .with_request(Request{0});
  LeakageLedger l(inst.space());
  l = accumulate(l, inst.mechanism(0), Transcript(), kSentinelOutput);
  // Database 2 reveals itself: impossible under 0 and 1.
  l = accumulate(l, inst.mechanism(1), partial, 2.0);
  EXPECT_TRUE(std::isnan(l.at(kXY)));
  EXPECT_EQ(l.at({DatabaseId{2}, DatabaseId{1}}), kInf);
}

TEST(Ledger, AntisymmetryIsExactOverRandomRuns) {
  std::mt19937_64 rng(7);
  const DatabaseSpace space({"a", "b", "c"}, {{0, 1}, {1, 2}, {0, 2}});
  const auto mech = std::make_shared<GaussianMechanism>(
      1.3, std::vector<double>{0.0, 0.7, -0.4});
  const Instance inst = Instance::Repeated(space, mech, {Request{0}}, 30);
  for (int run = 0; run < 50; ++run) {
    Transcript t;
    LeakageLedger l(space);
    for (int i = 0; i <= 30; ++i) {
      if (i > 0) t.receive(Request{0});
      const Output y = inst.mechanism(i).sample(t, DatabaseId{run % 3}, rng);
      l = accumulate(l, inst.mechanism(i), t, y);
      t.release(y);
      for (const auto& p : space.ordered_pairs()) {
        ASSERT_EQ(l.at(p), -l.at(p.reversed()));
      }
    }
  }
}

TEST(Ledger, EntriesAreSumsOfStepLeakages) {
  std::mt19937_64 rng(11);
  const Instance inst = make_gaussian_instance(0.8, 12, 1.5);
  Transcript t;
  LeakageLedger l(inst.space());
  double direct = 0.0;
  for (int i = 0; i <= 12; ++i) {
    if (i > 0) t.receive(Request{0});
    const Output y = inst.mechanism(i).sample(t, DatabaseId{1}, rng);
    direct += step_leakage(inst.mechanism(i), t, y, kXY);
    l = accumulate(l, inst.mechanism(i), t, y);
    t.release(y);
  }
  EXPECT_NEAR(l.at(kXY), direct, 1e-12);
}

TEST(DiscreteMechanism, NormalisedAndSamplesInSupport) {
  std::mt19937_64 rng(3);
  FunctionMechanism m([](const Transcript& t, DatabaseId x) {
    const double a = 0.1 + 0.05 * t.round() + 0.1 * x.value;
    return std::vector<OutputAtom>{{0.0, a}, {1.0, 0.3}, {2.0, 0.7 - a}};
  });
  Transcript t = Transcript().with_output(kSentinelOutput);
  for (int i = 1; i <= 5; ++i) {
    t.receive(Request{0});
    for (int d = 0; d < 2; ++d) {
      double total = 0.0;
      const auto atoms = m.support(t, DatabaseId{d});
      for (const auto& a : *atoms) {
        total += std::exp(m.log_density(t, DatabaseId{d}, a.value));
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
      for (int k = 0; k < 100; ++k) {
        const Output y = m.sample(t, DatabaseId{d}, rng);
        EXPECT_GT(m.log_density(t, DatabaseId{d}, y), -kInf);
      }
    }
    t.release(1.0);
  }
}

TEST(DiscreteMechanism, RejectsUnnormalisedTables) {
  std::map<TableMechanism::Key, std::vector<OutputAtom>> table;
  table[{Request{0}, DatabaseId{0}}] = {{0.0, 0.5}, {1.0, 0.4}};
  EXPECT_THROW(TableMechanism{table}, ConfigError);
  table[{Request{0}, DatabaseId{0}}] = {{0.0, 0.5}, {0.0, 0.5}};
  EXPECT_THROW(TableMechanism{table}, ConfigError);
}

TEST(PrivacyBudget, Validates) {
  EXPECT_THROW(PrivacyBudget(-1.0, 0.1), DomainError);
  EXPECT_THROW(PrivacyBudget(1.0, 1.5), DomainError);
  EXPECT_NO_THROW(PrivacyBudget(0.0, 0.0));
}

}  // namespace
}  // namespace realfilter
