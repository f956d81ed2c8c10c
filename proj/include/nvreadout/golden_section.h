// Copyright 2026 The nvreadout Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NVREADOUT_GOLDEN_SECTION_H_
#define NVREADOUT_GOLDEN_SECTION_H_

#include <cmath>
#include <utility>

namespace nvreadout {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for a minimum of a unimodal f on [lo, hi].
/// Stops once the bracket is narrower than `x_tolerance` or after
/// `max_iterations` reductions.
template <typename F>
ScalarMinimum GoldenSectionMinimize(F&& f, double lo, double hi,
                                    double x_tolerance,
                                    int max_iterations = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  int evaluations = 2;
  for (int i = 0; i < max_iterations && (hi - lo) > x_tolerance; ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
    ++evaluations;
  }
  return fc < fd ? ScalarMinimum{c, fc, evaluations}
                 : ScalarMinimum{d, fd, evaluations};
}

}  // namespace nvreadout

#endif  // NVREADOUT_GOLDEN_SECTION_H_
