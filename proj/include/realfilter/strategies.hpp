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

// Deterministic adversary strategies.

#ifndef REALFILTER_STRATEGIES_HPP_
#define REALFILTER_STRATEGIES_HPP_

#include <cmath>
#include <span>
#include <string>

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"

namespace realfilter {

namespace internal {

inline Request Pick(std::span<const Request> allowed, long long k) {
  const long long n = static_cast<long long>(allowed.size());
  return allowed[static_cast<std::size_t>(((k % n) + n) % n)];
}

}  // namespace internal

// Always the k-th allowable request (mod the set size).
inline Strategy fixed_strategy(int k) {
  return [k](const Transcript&, std::span<const Request> allowed) {
    return internal::Pick(allowed, k);
  };
}

// Walks through the allowable requests round by round.
inline Strategy cycle_strategy() {
  return [](const Transcript& history, std::span<const Request> allowed) {
    return internal::Pick(allowed, history.round());
  };
}

// Chooses by the last released output, so requests adapt to the data.
inline Strategy follow_strategy() {
  return [](const Transcript& history, std::span<const Request> allowed) {
    const Output y = history.outputs().back();
    if (!std::isfinite(y)) return allowed.front();
    return internal::Pick(allowed, static_cast<long long>(std::floor(y)));
  };
}

// "fixed:K", "cycle" or "follow".
inline Strategy parse_strategy(const std::string& name) {
  if (name == "cycle") return cycle_strategy();
  if (name == "follow") return follow_strategy();
  if (name.rfind("fixed:", 0) == 0) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(name.substr(6), &used);
      if (used == name.size() - 6) return fixed_strategy(k);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown strategy '" + name + "'");
}

}  // namespace realfilter

#endif  // REALFILTER_STRATEGIES_HPP_
