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

// Domain types shared by every filter: databases and their neighbour
// relation, transcripts, mechanisms and the realised-leakage ledger.
//
// Leakage is measured in nats. A leakage of +inf means the output is
// impossible under the second database of the pair; a ledger entry becomes
// NaN once the realised transcript is impossible under both databases of the
// pair, after which the pair carries no probability mass and is ignored by
// the checks.

#ifndef REALFILTER_CORE_HPP_
#define REALFILTER_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "realfilter/errors.hpp"

namespace realfilter {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Rng = std::mt19937_64;

struct DatabaseId {
  int value = 0;
  auto operator<=>(const DatabaseId&) const = default;
};

struct Request {
  int value = 0;
  auto operator<=>(const Request&) const = default;
};

// Outputs are real numbers. Discrete mechanisms use small non-negative codes.
using Output = double;

// r_0 and y_0 of every transcript.
inline constexpr Request kSentinelRequest{-1};
inline constexpr Output kSentinelOutput = -kInf;

struct OrderedPair {
  DatabaseId x;
  DatabaseId x_prime;
  auto operator<=>(const OrderedPair&) const = default;
  OrderedPair reversed() const { return {x_prime, x}; }
};

// A finite set of databases with a symmetric, irreflexive neighbour relation.
class DatabaseSpace {
 public:
  DatabaseSpace() = default;

  DatabaseSpace(std::vector<std::string> names,
                const std::vector<std::pair<int, int>>& neighbours)
      : names_(std::move(names)) {
    if (names_.empty()) throw ConfigError("database space is empty");
    for (auto [a, b] : neighbours) {
      if (a < 0 || b < 0 || a >= size() || b >= size()) {
        throw ConfigError("neighbour pair references an unknown database");
      }
      if (a == b) throw ConfigError("a database cannot neighbour itself");
      pairs_.push_back({DatabaseId{a}, DatabaseId{b}});
      pairs_.push_back({DatabaseId{b}, DatabaseId{a}});
    }
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
    if (pairs_.empty()) throw ConfigError("no neighbouring databases declared");
  }

  // Two databases named x and x' that neighbour each other.
  static DatabaseSpace TwoDatabases() {
    return DatabaseSpace({"x", "x'"}, {{0, 1}});
  }

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(DatabaseId id) const { return names_.at(id.value); }
  std::optional<DatabaseId> find(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return DatabaseId{static_cast<int>(it - names_.begin())};
  }
  std::vector<DatabaseId> databases() const {
    std::vector<DatabaseId> out;
    for (int i = 0; i < size(); ++i) out.push_back(DatabaseId{i});
    return out;
  }

  // Both orientations of every neighbour pair, sorted.
  std::span<const OrderedPair> ordered_pairs() const { return pairs_; }

  bool are_neighbours(DatabaseId a, DatabaseId b) const {
    return std::binary_search(pairs_.begin(), pairs_.end(), OrderedPair{a, b});
  }

 private:
  std::vector<std::string> names_;
  std::vector<OrderedPair> pairs_;
};

// Interleaved requests and outputs. A partial transcript at round i holds
// r_0..r_i and y_0..y_{i-1}; a full transcript at round i holds r_0..r_i and
// y_0..y_i. Round 0 always carries the sentinels.
class Transcript {
 public:
  enum class Kind { kPartial, kFull };

  // The partial transcript at round 0: (r_0) with no outputs.
  Transcript() : requests_{kSentinelRequest} {}

  Transcript(std::vector<Request> requests, std::vector<Output> outputs)
      : requests_(std::move(requests)), outputs_(std::move(outputs)) {
    if (requests_.empty() || requests_.front() != kSentinelRequest) {
      throw ConfigError("transcript must start with the sentinel request");
    }
    if (!outputs_.empty() && outputs_.front() != kSentinelOutput) {
      throw ConfigError("transcript must start with the sentinel output");
    }
    if (requests_.size() != outputs_.size() &&
        requests_.size() != outputs_.size() + 1) {
      throw ConfigError("transcript requests and outputs are misaligned");
    }
  }

  int round() const { return static_cast<int>(requests_.size()) - 1; }
  Kind kind() const {
    return requests_.size() == outputs_.size() ? Kind::kFull : Kind::kPartial;
  }
  bool is_partial() const { return kind() == Kind::kPartial; }

  std::span<const Request> requests() const { return requests_; }
  std::span<const Output> outputs() const { return outputs_; }
  Request request(int i) const { return requests_.at(i); }
  Output output(int i) const { return outputs_.at(i); }
  // r_i of a partial transcript.
  Request current_request() const { return requests_.back(); }

  void release(Output y) {
    if (!is_partial()) throw ConfigError("release on a full transcript");
    outputs_.push_back(y);
  }
  void receive(Request r) {
    if (is_partial()) throw ConfigError("receive on a partial transcript");
    requests_.push_back(r);
  }
  Transcript with_output(Output y) const {
    Transcript t = *this;
    t.release(y);
    return t;
  }
  Transcript with_request(Request r) const {
    Transcript t = *this;
    t.receive(r);
    return t;
  }
  // Overwrites y_{i} of a transcript whose last output is not the sentinel.
  // Used to evaluate many hypothetical outputs without copying.
  void set_last_output(Output y) {
    if (outputs_.size() < 2) throw ConfigError("no replaceable output");
    outputs_.back() = y;
  }
  // The partial transcript (r^i, y^{i-1}) of a full transcript at round i.
  Transcript without_last_output() const {
    if (is_partial()) throw ConfigError("transcript is already partial");
    Transcript t = *this;
    t.outputs_.pop_back();
    return t;
  }

  friend bool operator==(const Transcript&, const Transcript&) = default;
  friend std::partial_ordering operator<=>(const Transcript& a,
                                          const Transcript& b) {
    if (auto c = a.requests_ <=> b.requests_; c != 0) return c;
    return a.outputs_ <=> b.outputs_;
  }

 private:
  std::vector<Request> requests_;
  std::vector<Output> outputs_;
};

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  PrivacyBudget() = default;
  PrivacyBudget(double eps, double del) : epsilon(eps), delta(del) {
    if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
    if (!(delta >= 0.0 && delta <= 1.0)) {
      throw DomainError("delta must lie in [0, 1]");
    }
  }
};

struct OutputAtom {
  Output value;
  double probability;
};

struct NormalLaw {
  double mean;
  double stddev;
};

// One round's family of conditional output distributions
// P_x(y_i | r^i, y^{i-1}). The transcript argument is always the partial
// transcript (r^i, y^{i-1}).
class Mechanism {
 public:
  virtual ~Mechanism() = default;

  virtual Output sample(const Transcript& partial, DatabaseId x,
                        Rng& rng) const = 0;
  // -inf outside the support.
  virtual double log_density(const Transcript& partial, DatabaseId x,
                             Output y) const = 0;

  // Atoms with positive probability, for finite-support mechanisms.
  virtual std::optional<std::vector<OutputAtom>> support(
      const Transcript& /*partial*/, DatabaseId /*x*/) const {
    return std::nullopt;
  }
  // The output law when it is Gaussian.
  virtual std::optional<NormalLaw> normal_law(const Transcript& /*partial*/,
                                              DatabaseId /*x*/) const {
    return std::nullopt;
  }
  // P_x(L(x, x') > threshold | partial) in closed form, when available.
  virtual std::optional<double> leakage_tail(const Transcript& /*partial*/,
                                             OrderedPair /*pair*/,
                                             double /*threshold*/) const {
    return std::nullopt;
  }
  virtual bool has_analytic_tail() const { return false; }
};

// Round 0: releases y_0 = sentinel with probability one under every database.
class SentinelMechanism final : public Mechanism {
 public:
  Output sample(const Transcript&, DatabaseId, Rng&) const override {
    return kSentinelOutput;
  }
  double log_density(const Transcript&, DatabaseId, Output y) const override {
    return y == kSentinelOutput ? 0.0 : -kInf;
  }
  std::optional<std::vector<OutputAtom>> support(const Transcript&,
                                                 DatabaseId) const override {
    return std::vector<OutputAtom>{{kSentinelOutput, 1.0}};
  }
};

// Chooses r_i from the allowable set given the full transcript through
// round i-1. Any randomness must come from the strategy itself.
using Strategy = std::function<Request(const Transcript& history,
                                       std::span<const Request> allowed)>;

// The fixed sequence of mechanisms and allowable request sets over a
// database space. Index 0 is the sentinel round.
class Instance {
 public:
  Instance(DatabaseSpace space,
           std::vector<std::shared_ptr<const Mechanism>> mechanisms,
           std::vector<std::vector<Request>> request_sets)
      : space_(std::move(space)) {
    if (mechanisms.size() != request_sets.size()) {
      throw ConfigError("one request set is needed per mechanism");
    }
    mechanisms_.push_back(std::make_shared<SentinelMechanism>());
    request_sets_.push_back({kSentinelRequest});
    for (std::size_t i = 0; i < mechanisms.size(); ++i) {
      if (!mechanisms[i]) throw ConfigError("null mechanism");
      if (request_sets[i].empty()) {
        throw ConfigError("allowable request sets must be non-empty");
      }
      mechanisms_.push_back(std::move(mechanisms[i]));
      request_sets_.push_back(std::move(request_sets[i]));
    }
  }

  // Rounds 1..rounds all use the same mechanism and request set.
  static Instance Repeated(DatabaseSpace space,
                           std::shared_ptr<const Mechanism> mechanism,
                           std::vector<Request> requests, int rounds) {
    return Instance(
        std::move(space),
        std::vector<std::shared_ptr<const Mechanism>>(rounds, mechanism),
        std::vector<std::vector<Request>>(rounds, requests));
  }

  const DatabaseSpace& space() const { return space_; }
  int max_rounds() const { return static_cast<int>(mechanisms_.size()) - 1; }
  const Mechanism& mechanism(int i) const { return *mechanisms_.at(i); }
  std::span<const Request> requests(int i) const { return request_sets_.at(i); }

 private:
  DatabaseSpace space_;
  std::vector<std::shared_ptr<const Mechanism>> mechanisms_;
  std::vector<std::vector<Request>> request_sets_;
};

// Cumulative realised leakage l^(i)(x, x') for every ordered neighbour pair.
class LeakageLedger {
 public:
  LeakageLedger() = default;
  // All zeros at round -1, before the sentinel round.
  explicit LeakageLedger(const DatabaseSpace& space)
      : pairs_(std::make_shared<const std::vector<OrderedPair>>(
            space.ordered_pairs().begin(), space.ordered_pairs().end())),
        values_(pairs_->size(), 0.0),
        databases_(space.size()) {}

  int round() const { return round_; }
  int databases() const { return databases_; }
  std::span<const OrderedPair> pairs() const { return *pairs_; }
  std::span<const double> values() const { return values_; }
  std::size_t index(OrderedPair pair) const {
    auto it = std::lower_bound(pairs_->begin(), pairs_->end(), pair);
    if (it == pairs_->end() || *it != pair) {
      throw ConfigError("pair is not a neighbour pair of the ledger");
    }
    return static_cast<std::size_t>(it - pairs_->begin());
  }
  double at(OrderedPair pair) const { return values_[index(pair)]; }
  double value(std::size_t k) const { return values_[k]; }

  // Sets (x, x') to value and (x', x) to -value.
  void set(OrderedPair pair, double value) {
    values_[index(pair)] = value;
    values_[index(pair.reversed())] = -value;
  }
  void set_round(int round) { round_ = round; }

  // Adds one round of leakage given per-database log densities of the
  // realised output.
  void add_round(std::span<const double> log_densities) {
    for (std::size_t k = 0; k < pairs_->size(); ++k) {
      const OrderedPair& p = (*pairs_)[k];
      values_[k] += log_densities[p.x.value] - log_densities[p.x_prime.value];
    }
    ++round_;
  }

 private:
  std::shared_ptr<const std::vector<OrderedPair>> pairs_ =
      std::make_shared<const std::vector<OrderedPair>>();
  std::vector<double> values_;
  int databases_ = 0;
  int round_ = -1;
};

// l_i(x, x') = log P_x(y | partial) - log P_x'(y | partial).
inline double step_leakage(const Mechanism& mechanism,
                           const Transcript& partial, Output y,
                           OrderedPair pair) {
  const double a = mechanism.log_density(partial, pair.x, y);
  const double b = mechanism.log_density(partial, pair.x_prime, y);
  if (a == -kInf && b == -kInf) {
    throw UndefinedLeakageError("output lies outside both supports");
  }
  return a - b;
}

inline std::vector<double> log_densities(const Mechanism& mechanism,
                                         const Transcript& partial, Output y,
                                         int databases) {
  std::vector<double> out(databases);
  for (int d = 0; d < databases; ++d) {
    out[d] = mechanism.log_density(partial, DatabaseId{d}, y);
  }
  return out;
}

// l^(i) = l^(i-1) + l_i for every ordered pair. Pairs under which the output
// is impossible for both databases become NaN rather than raising.
inline LeakageLedger accumulate(LeakageLedger ledger,
                                const Mechanism& mechanism,
                                const Transcript& partial, Output y) {
  if (ledger.round() != partial.round() - 1) {
    throw ConfigError("ledger round does not precede the transcript round");
  }
  ledger.add_round(
      log_densities(mechanism, partial, y, ledger.databases()));
  return ledger;
}

}  // namespace realfilter

#endif  // REALFILTER_CORE_HPP_
