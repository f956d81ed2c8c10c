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

#ifndef NVREADOUT_SCC_MODEL_H_
#define NVREADOUT_SCC_MODEL_H_

#include <Eigen/Core>

namespace nvreadout {

// Six-level population transfer model of repeated shelve-and-ionize
// spin-to-charge conversion.  Level order (0-based index):
//   0: ms=0 ground        1: ms=+-1 ground
//   2: ms=0 excited       3: ms=+-1 excited
//   4: metastable singlet 5: NV0
// Levels 0, 1 and 5 are stable; 2, 3 and 4 are drained within each cycle.

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

enum class SpinState { kZero, kPlusMinusOne };

struct SccParams {
  double p_ion = 0.0;           // triplet ionization per excitation
  double k35 = 0.0;             // ms=0 excited -> singlet branching
  double k45 = 0.0;             // ms=+-1 excited -> singlet branching
  double p_sing = 0.0;          // singlet ionization per NIR train
  double k51_over_k52 = 1.0;    // singlet decay ratio into ms=0 vs ms=+-1
  double spin_init = 1.0;       // purity of the prepared spin sublevel
  double charge_init_nv0 = 0.0; // NV0 fraction before the first cycle

  /// Throws std::invalid_argument if any probability leaves [0,1] or the
  /// ratio is negative / non-finite.
  void Validate() const;

  // Derived by probability conservation in each column.
  double p_exc() const { return 1.0 - p_ion; }
  double k52() const { return (1.0 - p_sing) / (1.0 + k51_over_k52); }
  double k51() const { return k51_over_k52 * k52(); }
};

class SixLevelState {
 public:
  /// Throws std::invalid_argument unless entries are >= 0 and sum to 1
  /// within 1e-12.
  explicit SixLevelState(const Vector6& p);

  const Vector6& populations() const { return p_; }
  double operator[](int level) const { return p_(level); }
  /// p0 + p1: the NV- ground-state population read out as "bright".
  double nv_minus() const { return p_(0) + p_(1); }

 private:
  Vector6 p_;
};

struct SccEfficiency {
  double beta0 = 0.0;  // P(NV- detected | ms=0)
  double beta1 = 0.0;  // P(NV- detected | ms=+-1)
};

/// Step matrices of one cycle: excite (with triplet ionization), relax
/// (through the intersystem crossing), then attempt singlet ionization.
struct SccMatrices {
  Matrix6 excite;
  Matrix6 relax;
  Matrix6 ionize;

  /// ionize * relax * excite
  Matrix6 Cycle() const { return ionize * relax * excite; }
};

SccMatrices BuildMatrices(const SccParams& params);

bool IsColumnStochastic(const Matrix6& m, double tolerance = 1e-12);

SixLevelState InitialState(const SccParams& params, SpinState spin);

/// (cycle)^n * p0.
SixLevelState ApplyCycles(const SixLevelState& initial, const SccParams& params,
                          int cycles);

SccEfficiency SccEfficiencies(const SccParams& params, int cycles);

/// NV- survival after a single shelve + delayed NIR attempt:
/// 1 - shelved_fraction * p_sing * exp(-delay / singlet_lifetime).
double ShelfDelaySurvival(double p_sing, double singlet_lifetime_ns,
                          double delay_ns, double shelved_fraction);

}  // namespace nvreadout

#endif  // NVREADOUT_SCC_MODEL_H_
