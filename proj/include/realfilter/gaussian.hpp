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

// Closed-form machinery for repeated Gaussian counting queries: the leakage
// law, the release threshold kappa, the exact Gaussian privacy curve and the
// (delta_tilde, theta) optimiser.

#ifndef REALFILTER_GAUSSIAN_HPP_
#define REALFILTER_GAUSSIAN_HPP_

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"
#include "realfilter/mechanisms.hpp"
#include "realfilter/normal.hpp"
#include "realfilter/numeric.hpp"

namespace realfilter {

class GaussianSetting {
 public:
  // The two-database instance with r(x) = 0 and r(x') = sensitivity.
  explicit GaussianSetting(double sigma, double sensitivity = 1.0)
      : GaussianSetting(sigma, sensitivity, DatabaseSpace::TwoDatabases(),
                        {0.0, sensitivity}) {}

  GaussianSetting(double sigma, double sensitivity, DatabaseSpace space,
                  std::vector<double> query_values)
      : sigma_(sigma),
        sensitivity_(sensitivity),
        space_(std::move(space)),
        query_values_(std::move(query_values)) {
    if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
      throw DomainError("sigma must be positive and finite");
    }
    if (!(sensitivity_ > 0.0) || !std::isfinite(sensitivity_)) {
      throw DomainError("sensitivity must be positive and finite");
    }
    if (static_cast<int>(query_values_.size()) != space_.size()) {
      throw ConfigError("one query value is needed per database");
    }
    for (const auto& p : space_.ordered_pairs()) {
      const double gap =
          std::fabs(query_values_[p.x.value] - query_values_[p.x_prime.value]);
      if (std::fabs(gap - sensitivity_) > 1e-12 * sensitivity_) {
        throw ConfigError("neighbouring query values must differ by the "
                          "sensitivity");
      }
    }
  }

  double sigma() const { return sigma_; }
  double sensitivity() const { return sensitivity_; }
  const DatabaseSpace& space() const { return space_; }
  double query_value(DatabaseId x) const { return query_values_.at(x.value); }

  std::shared_ptr<const GaussianMechanism> mechanism() const {
    return std::make_shared<GaussianMechanism>(sigma_, query_values_);
  }
  Instance instance(int rounds) const {
    return Instance::Repeated(space_, mechanism(), {Request{0}}, rounds);
  }

 private:
  double sigma_;
  double sensitivity_;
  DatabaseSpace space_;
  std::vector<double> query_values_;
};

// Parameters of the realisation-level filter. Construction enforces
// delta_tilde + theta (1 - delta_tilde) N <= delta.
struct FilterParams {
  double delta_tilde = 0.0;
  double theta = 0.0;
  int max_rounds = 1;

  FilterParams() = default;
  FilterParams(double dt, double th, int n, const PrivacyBudget& budget)
      : delta_tilde(dt), theta(th), max_rounds(n) {
    if (!(delta_tilde >= 0.0 && delta_tilde <= budget.delta)) {
      throw DomainError("delta_tilde must lie in [0, delta]");
    }
    if (!(theta >= 0.0 && theta <= 1.0)) {
      throw DomainError("theta must lie in [0, 1]");
    }
    if (max_rounds < 1) throw DomainError("max_rounds must be positive");
    // Equality is the optimum, so allow rounding in the last few ulps.
    if (spent() > budget.delta * (1.0 + 1e-12)) {
      throw InfeasibleError("delta_tilde + theta (1 - delta_tilde) N exceeds "
                            "delta");
    }
  }

  double spent() const {
    return delta_tilde + theta * (1.0 - delta_tilde) * max_rounds;
  }
};

struct LeakageMoments {
  double mean;
  double variance;
};

// Law of one round's leakage L_i(x, x') under P_x.
inline LeakageMoments leakage_distribution(const GaussianSetting& setting) {
  const double ratio = setting.sensitivity() / setting.sigma();
  return {0.5 * ratio * ratio, ratio * ratio};
}

// Release threshold on l^(i-1): with unit sensitivity,
// eps - 1/sigma^2 - (Phi^-1(1 - dt) + Phi^-1(1 - theta)) / sigma.
// Non-unit sensitivity D scales the leakage law, giving
// eps - D^2/sigma^2 - D (Phi^-1(1 - dt) + Phi^-1(1 - theta)) / sigma.
inline double kappa(double epsilon, const GaussianSetting& setting,
                    const FilterParams& params) {
  if (params.delta_tilde >= 1.0 || params.theta >= 1.0) return kInf;
  if (params.delta_tilde <= 0.0 || params.theta <= 0.0) return -kInf;
  const double ratio = setting.sensitivity() / setting.sigma();
  return epsilon - ratio * ratio -
         ratio * (std_normal_upper_quantile(params.delta_tilde) +
                  std_normal_upper_quantile(params.theta));
}

// True iff every defined ordered-pair entry is at most kappa.
inline bool release_condition(const LeakageLedger& ledger, double kappa_value) {
  for (double v : ledger.values()) {
    if (std::isnan(v)) continue;
    if (!(v <= kappa_value)) return false;
  }
  return true;
}

// delta(eps) of the Gaussian mechanism (the tight trade-off curve).
inline double gaussian_delta(const GaussianSetting& setting, double epsilon) {
  const double a = setting.sensitivity() / (2.0 * setting.sigma());
  const double b = epsilon * setting.sigma() / setting.sensitivity();
  const double lower = std_normal_cdf(-a - b);
  const double second = lower > 0.0 ? std::exp(epsilon + std::log(lower)) : 0.0;
  return std::max(0.0, std_normal_cdf(a - b) - second);
}

// Smallest eps_i with the mechanism (eps_i, delta_i)-DP, to 1e-10 absolute.
inline double gaussian_privacy_curve(const GaussianSetting& setting,
                                     double delta_i) {
  if (!(delta_i > 0.0 && delta_i < 1.0)) {
    throw DomainError("delta_i must lie in (0, 1)");
  }
  if (gaussian_delta(setting, 0.0) <= delta_i) return 0.0;
  double hi = 1.0;
  while (gaussian_delta(setting, hi) > delta_i) hi *= 2.0;
  return bisect_threshold(
      [&](double eps) { return gaussian_delta(setting, eps) <= delta_i; }, 0.0,
      hi, 1e-11);
}

// The quantile sum minimised by optimize_params.
inline double quantile_sum(double delta_tilde, double theta) {
  return std_normal_upper_quantile(delta_tilde) +
         std_normal_upper_quantile(theta);
}

// theta that makes the filter constraint tight for a given delta_tilde.
inline double tight_theta(double delta_tilde, double delta, int rounds) {
  return (delta - delta_tilde) / (rounds * (1.0 - delta_tilde));
}

// Maximises kappa for N rounds by minimising the quantile sum over
// delta_tilde in (0, delta) with the constraint held at equality. The search
// runs over log(delta_tilde); tolerance is relative in delta_tilde.
inline FilterParams optimize_params(int rounds, const PrivacyBudget& budget,
                                    double tolerance = 1e-10) {
  if (rounds < 1) throw DomainError("rounds must be positive");
  if (budget.delta <= 0.0) {
    throw InfeasibleError("no filter parameters exist for delta = 0");
  }
  if (budget.delta >= 1.0) throw DomainError("delta must be below 1");
  const double delta = budget.delta;
  auto objective = [&](double log_dt) {
    const double dt = std::exp(log_dt);
    return quantile_sum(dt, tight_theta(dt, delta, rounds));
  };
  const double lo = std::log(delta) - 40.0;
  const double hi = std::log(delta) + std::log1p(-1e-12);
  const Minimum best = grid_refine_minimize(objective, lo, hi, 400, tolerance);
  const double dt = std::exp(best.x);
  return FilterParams(dt, tight_theta(dt, delta, rounds), rounds, budget);
}

}  // namespace realfilter

#endif  // REALFILTER_GAUSSIAN_HPP_
