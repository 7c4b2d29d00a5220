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

#ifndef REALFILTER_NUMERIC_HPP_
#define REALFILTER_NUMERIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace realfilter {

struct Minimum {
  double x;
  double value;
};

// Golden-section search for a unimodal f on [lo, hi]. Stops when the bracket
// is narrower than tolerance.
template <typename F>
Minimum golden_section_minimize(F&& f, double lo, double hi, double tolerance,
                                int max_iterations = 500) {
  constexpr double kInvPhi = 0.61803398874989484820;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iterations && (b - a) > tolerance; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
}

// Evaluates f on an evenly spaced grid of points over [lo, hi] and refines
// the best cell with golden-section search.
template <typename F>
Minimum grid_refine_minimize(F&& f, double lo, double hi, int points,
                             double tolerance) {
  const double step = (hi - lo) / (points - 1);
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < points; ++k) {
    const double v = f(lo + k * step);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  const double a = lo + std::max(best - 1, 0) * step;
  const double b = lo + std::min(best + 1, points - 1) * step;
  Minimum refined = golden_section_minimize(f, a, b, tolerance);
  if (refined.value <= best_value) return refined;
  return {lo + best * step, best_value};
}

// Smallest x in [lo, hi] with pred(x) true, for a predicate that is false
// then true along the interval. Returns hi if pred(lo) is false and the
// bracket shrinks to it.
template <typename Pred>
double bisect_threshold(Pred&& pred, double lo, double hi, double tolerance,
                        int max_iterations = 400) {
  for (int it = 0; it < max_iterations && (hi - lo) > tolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace realfilter

#endif  // REALFILTER_NUMERIC_HPP_
