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

#ifndef REALFILTER_ERRORS_HPP_
#define REALFILTER_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace realfilter {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Raised when a check needs exact probabilities that a mechanism cannot
// provide (no finite support and no closed-form law).
class UnsupportedMechanismError : public Error {
 public:
  using Error::Error;
};

// The output has zero density under both databases of the pair.
class UndefinedLeakageError : public Error {
 public:
  using Error::Error;
};

// An advanced-filter round with delta_i > 0 but epsilon_i = 0.
class DegenerateRoundError : public Error {
 public:
  using Error::Error;
};

class AtomBudgetExceededError : public Error {
 public:
  using Error::Error;
};

class MismatchedUniverseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace realfilter

#endif  // REALFILTER_ERRORS_HPP_
