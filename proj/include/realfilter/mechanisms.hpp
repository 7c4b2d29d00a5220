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

// Concrete mechanisms: Gaussian additive noise and finite-support tables.

#ifndef REALFILTER_MECHANISMS_HPP_
#define REALFILTER_MECHANISMS_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"
#include "realfilter/normal.hpp"

namespace realfilter {

// Y = r(x) + Z with Z ~ N(0, sigma^2); r(x) does not depend on the request.
class GaussianMechanism final : public Mechanism {
 public:
  GaussianMechanism(double sigma, std::vector<double> query_values)
      : sigma_(sigma), query_values_(std::move(query_values)) {
    if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
      throw DomainError("sigma must be positive and finite");
    }
  }

  double sigma() const { return sigma_; }
  double mean(DatabaseId x) const { return query_values_.at(x.value); }

  Output sample(const Transcript&, DatabaseId x, Rng& rng) const override {
    std::normal_distribution<double> noise(0.0, sigma_);
    return mean(x) + noise(rng);
  }

  double log_density(const Transcript&, DatabaseId x, Output y) const override {
    const double z = (y - mean(x)) / sigma_;
    return -0.5 * z * z - std::log(sigma_ * kSqrt2Pi);
  }

  std::optional<NormalLaw> normal_law(const Transcript&,
                                      DatabaseId x) const override {
    return NormalLaw{mean(x), sigma_};
  }

  // Under P_x, L(x, x') ~ N(D^2 / (2 sigma^2), D^2 / sigma^2) with
  // D = |r(x) - r(x')|.
  std::optional<double> leakage_tail(const Transcript&, OrderedPair pair,
                                     double threshold) const override {
    const double gap = std::fabs(mean(pair.x) - mean(pair.x_prime));
    if (gap == 0.0) return 0.0 > threshold ? 1.0 : 0.0;
    if (threshold == kInf) return 0.0;
    if (threshold == -kInf) return 1.0;
    return std_normal_sf(threshold * sigma_ / gap - gap / (2.0 * sigma_));
  }
  bool has_analytic_tail() const override { return true; }

 private:
  double sigma_;
  std::vector<double> query_values_;
};

// Base for finite-support mechanisms; subclasses supply the distribution.
class DiscreteMechanism : public Mechanism {
 public:
  virtual const std::vector<OutputAtom>& distribution(
      const Transcript& partial, DatabaseId x) const = 0;

  Output sample(const Transcript& partial, DatabaseId x,
                Rng& rng) const override {
    const auto& atoms = distribution(partial, x);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double u = uniform(rng);
    for (const auto& a : atoms) {
      if (u < a.probability) return a.value;
      u -= a.probability;
    }
    return atoms.back().value;
  }

  double log_density(const Transcript& partial, DatabaseId x,
                     Output y) const override {
    for (const auto& a : distribution(partial, x)) {
      if (a.value == y) return std::log(a.probability);
    }
    return -kInf;
  }

  std::optional<std::vector<OutputAtom>> support(const Transcript& partial,
                                                 DatabaseId x) const override {
    return distribution(partial, x);
  }

 protected:
  // Drops zero atoms and checks normalisation.
  static std::vector<OutputAtom> Normalised(std::vector<OutputAtom> atoms) {
    double total = 0.0;
    std::vector<OutputAtom> kept;
    for (const auto& a : atoms) {
      if (!(a.probability >= 0.0) || a.probability > 1.0) {
        throw ConfigError("output probability outside [0, 1]");
      }
      total += a.probability;
      if (a.probability > 0.0) kept.push_back(a);
    }
    if (std::fabs(total - 1.0) > 1e-9) {
      throw ConfigError("output probabilities do not sum to one");
    }
    std::sort(kept.begin(), kept.end(),
              [](const OutputAtom& a, const OutputAtom& b) {
                return a.value < b.value;
              });
    for (std::size_t k = 1; k < kept.size(); ++k) {
      if (kept[k].value == kept[k - 1].value) {
        throw ConfigError("duplicate output in a distribution");
      }
    }
    return kept;
  }
};

// Output law depends on the current request and the database only.
class TableMechanism final : public DiscreteMechanism {
 public:
  using Key = std::pair<Request, DatabaseId>;

  explicit TableMechanism(std::map<Key, std::vector<OutputAtom>> table) {
    for (auto& [key, atoms] : table) table_[key] = Normalised(std::move(atoms));
  }

  const std::vector<OutputAtom>& distribution(const Transcript& partial,
                                              DatabaseId x) const override {
    auto it = table_.find({partial.current_request(), x});
    if (it == table_.end()) {
      throw ConfigError("no output distribution for request " +
                        std::to_string(partial.current_request().value) +
                        " and database " + std::to_string(x.value));
    }
    return it->second;
  }

 private:
  std::map<Key, std::vector<OutputAtom>> table_;
};

// Output law computed from the whole partial transcript, for adaptive
// mechanisms. Results are cached per (transcript, database); the cache is
// not synchronised, so instances must not be shared across threads.
class FunctionMechanism final : public DiscreteMechanism {
 public:
  using Law = std::function<std::vector<OutputAtom>(const Transcript&,
                                                    DatabaseId)>;
  explicit FunctionMechanism(Law law) : law_(std::move(law)) {}

  const std::vector<OutputAtom>& distribution(const Transcript& partial,
                                              DatabaseId x) const override {
    auto key = std::make_pair(partial, x);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(std::move(key), Normalised(law_(partial, x))).first;
    }
    return it->second;
  }

 private:
  Law law_;
  mutable std::map<std::pair<Transcript, DatabaseId>, std::vector<OutputAtom>>
      cache_;
};

// Output code of the erasure symbol in an erasure instance over n databases.
// Database d reveals itself as code d.
inline Output erasure_symbol(int databases) {
  return static_cast<Output>(databases);
}

// Repeats the binary erasure mechanism: Y = X with probability p, the
// erasure symbol otherwise. Two databases give the pair (x, x').
inline Instance make_erasure_instance(double p, int rounds,
                                      int databases = 2) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
  if (databases < 2) throw ConfigError("need at least two databases");
  DatabaseSpace space;
  if (databases == 2) {
    space = DatabaseSpace::TwoDatabases();
  } else {
    std::vector<std::string> names;
    std::vector<std::pair<int, int>> neighbours;
    for (int d = 0; d < databases; ++d) {
      names.push_back("x" + std::to_string(d));
      if (d > 0) neighbours.push_back({d - 1, d});
    }
    space = DatabaseSpace(std::move(names), neighbours);
  }
  std::map<TableMechanism::Key, std::vector<OutputAtom>> table;
  for (int d = 0; d < databases; ++d) {
    table[{Request{0}, DatabaseId{d}}] = {
        {static_cast<Output>(d), p}, {erasure_symbol(databases), 1.0 - p}};
  }
  return Instance::Repeated(std::move(space),
                            std::make_shared<TableMechanism>(std::move(table)),
                            {Request{0}}, rounds);
}

// Two neighbouring databases with r(x) = 0 and r(x') = sensitivity.
inline Instance make_gaussian_instance(double sigma, int rounds,
                                       double sensitivity = 1.0) {
  return Instance::Repeated(
      DatabaseSpace::TwoDatabases(),
      std::make_shared<GaussianMechanism>(
          sigma, std::vector<double>{0.0, sensitivity}),
      {Request{0}}, rounds);
}

}  // namespace realfilter

#endif  // REALFILTER_MECHANISMS_HPP_
