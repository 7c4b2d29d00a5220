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

// Plain-text instance files for finite-support verification runs.
//
//   # comment
//   databases  = x y z
//   neighbours = x-y y-z
//   rounds     = 3
//   epsilon    = 1
//   delta      = 0.1
//   filter     = delta_hat           # or naive
//   delta_tilde = 0.01               # delta_hat only
//   theta       = 0.01
//   strategies = fixed:0 cycle follow
//   requests * = a b                 # or "requests 2 = a" for one round
//   output * a x = yes:0.6 no:0.4    # output <round|*> <request> <database>
//
// Request names and output labels are mapped to integer codes in order of
// first appearance. Entries for a specific round take precedence over "*".

#ifndef REALFILTER_INSTANCE_IO_HPP_
#define REALFILTER_INSTANCE_IO_HPP_

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "realfilter/core.hpp"
#include "realfilter/errors.hpp"
#include "realfilter/gaussian.hpp"
#include "realfilter/mechanisms.hpp"
#include "realfilter/real_filter.hpp"
#include "realfilter/strategies.hpp"

namespace realfilter {

enum class FilterKind { kDeltaHat, kNaive };

struct InstanceSpec {
  Instance instance;
  PrivacyBudget budget;
  FilterKind filter = FilterKind::kDeltaHat;
  std::optional<FilterParams> params;
  std::vector<std::string> strategies;
  std::vector<std::string> request_names;
  std::vector<std::string> output_labels;

  std::unique_ptr<StoppingRule> make_rule() const {
    if (filter == FilterKind::kNaive) return std::make_unique<NaiveRule>(budget);
    return std::make_unique<DeltaHatRule>(budget, *params);
  }
};

namespace internal {

inline std::vector<std::string> Words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double ParseNumber(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError("bad number for " + what + ": '" + s + "'");
  }
  return v;
}

inline int ParseCount(const std::string& s, const std::string& what) {
  const double v = ParseNumber(s, what);
  if (v != static_cast<double>(static_cast<long long>(v)) || v < 0 ||
      v > 1e9) {
    throw ConfigError("bad integer for " + what + ": '" + s + "'");
  }
  return static_cast<int>(v);
}

// Index of name in names, appending it if new.
inline int Intern(std::vector<std::string>& names, const std::string& name) {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return static_cast<int>(k);
  }
  names.push_back(name);
  return static_cast<int>(names.size()) - 1;
}

// 0 stands for "*".
inline int ParseRoundKey(const std::string& s) {
  if (s == "*") return 0;
  const int r = ParseCount(s, "round");
  if (r < 1) throw ConfigError("rounds are numbered from 1");
  return r;
}

}  // namespace internal

inline InstanceSpec parse_instance(std::istream& in) {
  std::map<std::string, std::string> scalars;
  std::vector<std::string> database_names;
  std::vector<std::string> neighbour_words;
  std::vector<std::string> request_names;
  std::vector<std::string> labels;
  std::map<int, std::vector<int>> requests;  // round (0 = *) -> codes
  // (round, request, database) -> atoms
  std::map<std::tuple<int, int, int>, std::vector<OutputAtom>> outputs;
  std::vector<std::tuple<int, std::string, std::string, std::string>>
      raw_outputs;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = internal::Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected '='");
    }
    const auto lhs = internal::Words(line.substr(0, eq));
    const std::string rhs = internal::Trim(line.substr(eq + 1));
    if (lhs.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": missing key");
    }
    const std::string& key = lhs[0];
    if (key == "requests") {
      if (lhs.size() != 2) throw ConfigError("requests needs a round or '*'");
      auto& codes = requests[internal::ParseRoundKey(lhs[1])];
      codes.clear();
      for (const auto& w : internal::Words(rhs)) {
        codes.push_back(internal::Intern(request_names, w));
      }
      if (codes.empty()) throw ConfigError("empty request set");
    } else if (key == "output") {
      if (lhs.size() != 4) {
        throw ConfigError("output needs <round|*> <request> <database>");
      }
      raw_outputs.emplace_back(internal::ParseRoundKey(lhs[1]), lhs[2], lhs[3],
                               rhs);
    } else if (lhs.size() == 1) {
      if (key == "databases") {
        database_names = internal::Words(rhs);
      } else if (key == "neighbours" || key == "neighbors") {
        neighbour_words = internal::Words(rhs);
      } else if (key == "rounds" || key == "epsilon" || key == "delta" ||
                 key == "filter" || key == "delta_tilde" || key == "theta" ||
                 key == "strategies") {
        scalars[key] = rhs;
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }

  auto need = [&](const std::string& k) -> const std::string& {
    auto it = scalars.find(k);
    if (it == scalars.end()) throw ConfigError("missing key '" + k + "'");
    return it->second;
  };

  std::vector<std::pair<int, int>> neighbours;
  auto db_index = [&](const std::string& name) {
    for (std::size_t k = 0; k < database_names.size(); ++k) {
      if (database_names[k] == name) return static_cast<int>(k);
    }
    throw ConfigError("unknown database '" + name + "'");
  };
  for (const auto& w : neighbour_words) {
    const auto dash = w.find('-');
    if (dash == std::string::npos) {
      throw ConfigError("neighbour pairs are written a-b");
    }
    neighbours.emplace_back(db_index(w.substr(0, dash)),
                            db_index(w.substr(dash + 1)));
  }
  DatabaseSpace space(database_names, neighbours);

  for (const auto& [round, req, db, atoms_text] : raw_outputs) {
    auto it = std::find(request_names.begin(), request_names.end(), req);
    if (it == request_names.end()) {
      throw ConfigError("output for undeclared request '" + req + "'");
    }
    const int req_code = static_cast<int>(it - request_names.begin());
    std::vector<OutputAtom> atoms;
    for (const auto& item : internal::Words(atoms_text)) {
      const auto colon = item.rfind(':');
      if (colon == std::string::npos) {
        throw ConfigError("outputs are written label:probability");
      }
      const int code = internal::Intern(labels, item.substr(0, colon));
      atoms.push_back({static_cast<Output>(code),
                       internal::ParseNumber(item.substr(colon + 1),
                                             "probability")});
    }
    outputs[{round, req_code, db_index(db)}] = std::move(atoms);
  }

  const int rounds = internal::ParseCount(need("rounds"), "rounds");
  if (rounds < 1) throw ConfigError("rounds must be positive");
  std::vector<std::shared_ptr<const Mechanism>> mechanisms;
  std::vector<std::vector<Request>> request_sets;
  for (int i = 1; i <= rounds; ++i) {
    auto rq = requests.find(i);
    if (rq == requests.end()) rq = requests.find(0);
    if (rq == requests.end()) {
      throw ConfigError("no request set for round " + std::to_string(i));
    }
    std::vector<Request> set;
    std::map<TableMechanism::Key, std::vector<OutputAtom>> table;
    for (int code : rq->second) {
      set.push_back(Request{code});
      for (int d = 0; d < space.size(); ++d) {
        auto out = outputs.find({i, code, d});
        if (out == outputs.end()) out = outputs.find({0, code, d});
        if (out == outputs.end()) {
          throw ConfigError("no output distribution for round " +
                            std::to_string(i) + ", request '" +
                            request_names[code] + "', database '" +
                            database_names[d] + "'");
        }
        table[{Request{code}, DatabaseId{d}}] = out->second;
      }
    }
    mechanisms.push_back(std::make_shared<TableMechanism>(std::move(table)));
    request_sets.push_back(std::move(set));
  }

  InstanceSpec spec{
      Instance(std::move(space), std::move(mechanisms), std::move(request_sets)),
      PrivacyBudget(internal::ParseNumber(need("epsilon"), "epsilon"),
                    internal::ParseNumber(need("delta"), "delta")),
      FilterKind::kDeltaHat, std::nullopt, {}, {}, {}};
  const std::string filter = scalars.count("filter") ? scalars["filter"]
                                                     : "delta_hat";
  if (filter == "naive") {
    spec.filter = FilterKind::kNaive;
  } else if (filter == "delta_hat") {
    spec.filter = FilterKind::kDeltaHat;
    spec.params = FilterParams(
        internal::ParseNumber(need("delta_tilde"), "delta_tilde"),
        internal::ParseNumber(need("theta"), "theta"), rounds, spec.budget);
  } else {
    throw ConfigError("filter must be delta_hat or naive");
  }
  spec.strategies = internal::Words(
      scalars.count("strategies") ? scalars["strategies"] : "fixed:0");
  for (const auto& s : spec.strategies) parse_strategy(s);
  spec.request_names = std::move(request_names);
  spec.output_labels = std::move(labels);
  return spec;
}

inline InstanceSpec load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file '" + path + "'");
  return parse_instance(in);
}

}  // namespace realfilter

#endif  // REALFILTER_INSTANCE_IO_HPP_
