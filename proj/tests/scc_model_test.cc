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

#include <gtest/gtest.h>

namespace nvreadout {
namespace {

SccParams ReferenceScc() {
  SccParams p;
  p.p_ion = 0.005;
  p.charge_init_nv0 = 0.04;
  p.k35 = 0.033;
  p.k45 = 0.25;
  p.p_sing = 0.32;
  p.k51_over_k52 = 2.26;
  p.spin_init = 0.85;
  return p;
}

TEST(SccParams, DerivedBranchings) {
  const SccParams p = ReferenceScc();
  EXPECT_DOUBLE_EQ(p.p_exc(), 0.995);
  EXPECT_NEAR(p.k51() + p.k52() + p.p_sing, 1.0, 1e-15);
  EXPECT_NEAR(p.k51() / p.k52(), 2.26, 1e-12);
}

TEST(BuildMatrices, ColumnStochastic) {
  const SccMatrices m = BuildMatrices(ReferenceScc());
  EXPECT_TRUE(IsColumnStochastic(m.excite));
  EXPECT_TRUE(IsColumnStochastic(m.relax));
  EXPECT_TRUE(IsColumnStochastic(m.ionize));
  EXPECT_TRUE(IsColumnStochastic(m.Cycle()));
}

TEST(BuildMatrices, NothingHappensWithoutShelvingOrIonization) {
  SccParams p;
  p.p_ion = 0.0;
  p.k35 = p.k45 = p.p_sing = 0.0;
  const Matrix6 c = BuildMatrices(p).Cycle();
  Vector6 v;
  v << 0.3, 0.6, 0, 0, 0, 0.1;
  EXPECT_TRUE((c * v).isApprox(v, 1e-15));
}

TEST(BuildMatrices, FullSingletIonization) {
  SccParams p = ReferenceScc();
  p.p_sing = 1.0;
  const Matrix6 ion = BuildMatrices(p).ionize;
  EXPECT_DOUBLE_EQ(ion(5, 4), 1.0);
  EXPECT_DOUBLE_EQ(ion(0, 4) + ion(1, 4), 0.0);
}

TEST(BuildMatrices, InvalidParamsRejected) {
  SccParams p = ReferenceScc();
  p.k45 = 1.5;
  EXPECT_THROW(BuildMatrices(p), std::invalid_argument);
}

TEST(InitialState, ReferenceSccMsZero) {
  const auto s = InitialState(ReferenceScc(), SpinState::kZero);
  EXPECT_NEAR(s[0], 0.816, 1e-12);
  EXPECT_NEAR(s[1], 0.144, 1e-12);
  EXPECT_DOUBLE_EQ(s[2] + s[3] + s[4], 0.0);
  EXPECT_NEAR(s[5], 0.04, 1e-15);
  EXPECT_NEAR(s.populations().sum(), 1.0, 1e-15);
}

TEST(InitialState, PerfectPreparationIsBasisVector) {
  SccParams p = ReferenceScc();
  p.spin_init = 1.0;
  p.charge_init_nv0 = 0.0;
  const auto s = InitialState(p, SpinState::kPlusMinusOne);
  EXPECT_DOUBLE_EQ(s[1], 1.0);
  EXPECT_DOUBLE_EQ(s.populations().sum(), 1.0);
}

TEST(ApplyCycles, ZeroCyclesIsIdentity) {
  const auto s = InitialState(ReferenceScc(), SpinState::kZero);
  EXPECT_TRUE(ApplyCycles(s, ReferenceScc(), 0).populations().isApprox(s.populations()));
}

TEST(ApplyCycles, TransientLevelsEmptyAndNeutralGrows) {
  SixLevelState s = InitialState(ReferenceScc(), SpinState::kPlusMinusOne);
  double last_nv0 = s[5];
  for (int n = 1; n <= 30; ++n) {
    s = ApplyCycles(s, ReferenceScc(), 1);
    EXPECT_NEAR(s[2] + s[3] + s[4], 0.0, 1e-15);
    EXPECT_NEAR(s.populations().sum(), 1.0, 1e-12);
    EXPECT_GE(s[5], last_nv0);
    last_nv0 = s[5];
  }
}

TEST(SccEfficiencies, ReferenceSccTenRepeats) {
  const SccEfficiency e = SccEfficiencies(ReferenceScc(), 10);
  EXPECT_NEAR(e.beta0, 0.80, 0.03);
  EXPECT_NEAR(e.beta1, 0.60, 0.03);
}

TEST(SccEfficiencies, NothingIonizes) {
  SccParams p = ReferenceScc();
  p.p_sing = 0.0;
  p.p_ion = 0.0;
  const SccEfficiency e = SccEfficiencies(p, 25);
  EXPECT_NEAR(e.beta0, 0.96, 1e-12);
  EXPECT_NEAR(e.beta1, 0.96, 1e-12);
}

TEST(SccEfficiencies, MsOneMonotoneInRepeats) {
  double last = 1.0;
  for (int n = 0; n <= 40; ++n) {
    const double b = SccEfficiencies(ReferenceScc(), n).beta1;
    EXPECT_LE(b, last + 1e-15);
    last = b;
  }
}

TEST(ShelfDelay, Limits) {
  EXPECT_NEAR(ShelfDelaySurvival(0.32, 182.0, 1e6, 0.2), 1.0, 1e-15);
  EXPECT_NEAR(ShelfDelaySurvival(0.35, 182.0, 0.0, 0.2), 0.93, 1e-15);
}

}  // namespace
}  // namespace nvreadout
