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

#include "nvreadout/scc_model.h"

#include <cmath>
#include <stdexcept>

namespace nvreadout {
namespace {

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void SccParams::Validate() const {
  for (double p : {p_ion, k35, k45, p_sing, spin_init, charge_init_nv0}) {
    if (!IsProbability(p)) {
      throw std::invalid_argument("SCC probabilities must lie in [0,1]");
    }
  }
  if (!(k51_over_k52 >= 0.0) || !std::isfinite(k51_over_k52)) {
    throw std::invalid_argument("k51/k52 must be finite and >= 0");
  }
}

SixLevelState::SixLevelState(const Vector6& p) : p_(p) {
  if ((p.array() < 0.0).any() || !p.allFinite()) {
    throw std::invalid_argument("six-level populations must be >= 0");
  }
  if (std::abs(p.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("six-level populations must sum to 1");
  }
}

bool IsColumnStochastic(const Matrix6& m, double tolerance) {
  if ((m.array() < 0.0).any()) return false;
  const auto sums = m.colwise().sum();
  return ((sums.array() - 1.0).abs() <= tolerance).all();
}

SccMatrices BuildMatrices(const SccParams& params) {
  params.Validate();
  SccMatrices out;

  // Levels that are always empty on entry to a step pass through on the
  // diagonal, which keeps every column stochastic without changing any
  // reachable population.
  out.excite.setZero();
  out.excite(2, 0) = params.p_exc();
  out.excite(3, 1) = params.p_exc();
  out.excite(5, 0) = params.p_ion;
  out.excite(5, 1) = params.p_ion;
  out.excite(2, 2) = 1.0;
  out.excite(3, 3) = 1.0;
  out.excite(4, 4) = 1.0;
  out.excite(5, 5) = 1.0;

  out.relax.setZero();
  out.relax(0, 0) = 1.0;
  out.relax(1, 1) = 1.0;
  out.relax(0, 2) = 1.0 - params.k35;
  out.relax(1, 3) = 1.0 - params.k45;
  out.relax(4, 2) = params.k35;
  out.relax(4, 3) = params.k45;
  out.relax(4, 4) = 1.0;
  out.relax(5, 5) = 1.0;

  out.ionize.setZero();
  out.ionize(0, 0) = 1.0;
  out.ionize(1, 1) = 1.0;
  out.ionize(2, 2) = 1.0;
  out.ionize(3, 3) = 1.0;
  out.ionize(0, 4) = params.k51();
  out.ionize(1, 4) = params.k52();
  out.ionize(5, 4) = params.p_sing;
  out.ionize(5, 5) = 1.0;

  for (const Matrix6* m : {&out.excite, &out.relax, &out.ionize}) {
    if (!IsColumnStochastic(*m)) {
      throw std::invalid_argument(
          "SCC parameters violate probability conservation");
    }
  }
  return out;
}

SixLevelState InitialState(const SccParams& params, SpinState spin) {
  params.Validate();
  const double charged = 1.0 - params.charge_init_nv0;
  Vector6 p = Vector6::Zero();
  const int prepared = spin == SpinState::kZero ? 0 : 1;
  p(prepared) = charged * params.spin_init;
  p(1 - prepared) = charged * (1.0 - params.spin_init);
  p(5) = params.charge_init_nv0;
  return SixLevelState(p);
}

SixLevelState ApplyCycles(const SixLevelState& initial, const SccParams& params,
                          int cycles) {
  if (cycles < 0) throw std::invalid_argument("cycle count must be >= 0");
  const Matrix6 cycle = BuildMatrices(params).Cycle();
  Vector6 p = initial.populations();
  for (int i = 0; i < cycles; ++i) p = cycle * p;
  // Renormalize accumulated rounding so the invariant check stays at 1e-12.
  p = p.cwiseMax(0.0);
  p /= p.sum();
  return SixLevelState(p);
}

SccEfficiency SccEfficiencies(const SccParams& params, int cycles) {
  SccEfficiency eff;
  eff.beta0 =
      ApplyCycles(InitialState(params, SpinState::kZero), params, cycles)
          .nv_minus();
  eff.beta1 = ApplyCycles(InitialState(params, SpinState::kPlusMinusOne),
                          params, cycles)
                  .nv_minus();
  return eff;
}

double ShelfDelaySurvival(double p_sing, double singlet_lifetime_ns,
                          double delay_ns, double shelved_fraction) {
  if (!IsProbability(p_sing) || !IsProbability(shelved_fraction)) {
    throw std::invalid_argument("probabilities must lie in [0,1]");
  }
  if (!(singlet_lifetime_ns > 0.0)) {
    throw std::invalid_argument("singlet lifetime must be > 0");
  }
  if (!(delay_ns >= 0.0)) throw std::invalid_argument("delay must be >= 0");
  return 1.0 - shelved_fraction * p_sing * std::exp(-delay_ns / singlet_lifetime_ns);
}

}  // namespace nvreadout
