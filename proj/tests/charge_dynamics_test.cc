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


#include "nvreadout/charge_dynamics.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.h"

namespace nvreadout {
namespace {

const NirRatePolynomial kIonPoly{4.7e-7, 0.0, 0.039};
const NirRatePolynomial kRecPoly{5.1e-7, 8.4e-5, 1e-7};
const DestructivityMatrix kReadoutD({{{0.65, 0.05}, {0.35, 0.95}}});

MultiphotonRateModel RandomModel(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 10.0);
  return {u(rng), u(rng), u(rng) * 1e-2, u(rng), u(rng)};
}

TEST(ChargePopulation, RejectsInvalidEntries) {
  EXPECT_THROW(ChargePopulation(0.6, 0.6), std::invalid_argument);
  EXPECT_THROW(ChargePopulation(-0.1, 1.1), std::invalid_argument);
  EXPECT_NO_THROW(ChargePopulation(0.25, 0.75));
}

TEST(Rates, IonizationAndRecombinationSums) {
  MultiphotonRateModel m;
  m.d20 = 1.0;
  m.d11 = 6.69;
  EXPECT_DOUBLE_EQ(RecombinationRate(m, 1.0, 1.0), 7.69);
  EXPECT_DOUBLE_EQ(RecombinationRate(m, 0.0, 5.0), 0.0);
  m.c20 = 2.0;
  m.c11 = 0.5;
  m.c12 = 0.1;
  EXPECT_DOUBLE_EQ(IonizationRate(m, 2.0, 3.0), 2.0 * 4 + 0.5 * 6 + 0.1 * 18);
}

TEST(Rates, RecombinationIsLinearInNirPower) {
  const MultiphotonRateModel m{1.0, 1.0, 0.01, 3.5, 6.69};
  const double g = 5.0;
  const double s1 = RecombinationRate(m, g, 11.0) - RecombinationRate(m, g, 10.0);
  const double s2 = RecombinationRate(m, g, 81.0) - RecombinationRate(m, g, 80.0);
  EXPECT_NEAR(s1, s2, 1e-12);
}

TEST(Rates, NegativeCoefficientRejected) {
  MultiphotonRateModel m;
  m.c20 = -1.0;
  EXPECT_THROW(m.Validate(), std::invalid_argument);
}

TEST(Evolve, SymmetricRatesRelaxToHalf) {
  EXPECT_NEAR(Evolve(ChargePopulation::Negative(), 1.0, 1.0, 1e6).p_minus(),
              0.5, 1e-12);
}

TEST(Evolve, ZeroTimeIsIdentity) {
  const auto p = ChargePopulation::FromMinus(0.37);
  EXPECT_DOUBLE_EQ(Evolve(p, 2.0, 3.0, 0.0).p_minus(), 0.37);
}

TEST(Evolve, MatchesRungeKutta) {
  const double rk = testing::IntegrateRk4(0.2, 0.3, 0.7, 2.0);
  EXPECT_NEAR(Evolve(ChargePopulation::FromMinus(0.2), 0.3, 0.7, 2.0).p_minus(),
              rk, 1e-9);
}

TEST(Evolve, ZeroRatesLeavePopulationUnchanged) {
  EXPECT_DOUBLE_EQ(Evolve(ChargePopulation::FromMinus(0.3), 0, 0, 5).p_minus(),
                   0.3);
}

TEST(Evolve, NegativeTimeIsDomainError) {
  EXPECT_THROW(Evolve(ChargePopulation::Negative(), 1, 1, -1), std::domain_error);
}

TEST(Evolve, IsASemigroup) {
  const auto p0 = ChargePopulation::FromMinus(0.9);
  const auto a = Evolve(Evolve(p0, 0.4, 1.3, 0.7), 0.4, 1.3, 1.1);
  const auto b = Evolve(p0, 0.4, 1.3, 1.8);
  EXPECT_NEAR(a.p_minus(), b.p_minus(), 1e-9);
}

TEST(Evolve, SteadyStateIsFixedPoint) {
  const MultiphotonRateModel m{1.0, 2.0, 0.05, 3.0, 4.0};
  const auto ss = SteadyState(m, 2.0, 7.0);
  const double ion = IonizationRate(m, 2.0, 7.0);
  const double rec = RecombinationRate(m, 2.0, 7.0);
  EXPECT_NEAR(Evolve(ss, ion, rec, 0.37).p_minus(), ss.p_minus(), 1e-12);
}

TEST(SteadyState, VisibleOnlyPopulation) {
  MultiphotonRateModel m;
  m.c20 = 0.22;
  m.d20 = 0.78;
  EXPECT_NEAR(SteadyState(m, 3.0, 0.0).p_minus(), 0.78, 1e-12);
}

TEST(SteadyState, HugeTwoNirIonizationDrivesToZero) {
  const MultiphotonRateModel m{1.0, 1.0, 1e9, 1.0, 1.0};
  EXPECT_LT(SteadyState(m, 1.0, 10.0).p_minus(), 1e-8);
}

TEST(SteadyState, BothRatesZeroIsDomainError) {
  EXPECT_THROW(SteadyState(MultiphotonRateModel{}, 0.0, 0.0), std::domain_error);
}

TEST(SteadyState, AgreesWithParametricFormOnRandomModels) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> g(0.1, 50.0), r(0.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    const auto m = RandomModel(rng);
    const double gi = g(rng), ri = r(rng);
    EXPECT_NEAR(SteadyState(m, gi, ri).p_minus(),
                SteadyStateParametric(DeriveParams(m, gi), ri), 1e-12);
  }
}

TEST(SteadyStateParametric, ReducesToGammaAtZeroPower) {
  EXPECT_DOUBLE_EQ(SteadyStateParametric({0.3, 0.01, 0.62, 0.2}, 0.0), 0.62);
}

TEST(SteadyStateParametric, EqualAlphaDeltaWithoutBetaIsFlat) {
  for (double r : {0.0, 1.0, 50.0, 300.0}) {
    EXPECT_NEAR(SteadyStateParametric({0.4, 0.0, 0.7, 0.4}, r), 0.7, 1e-15);
  }
}

TEST(SteadyStateParametric, PeaksAboveNinetyPercent) {
  const SteadyStateParams p{0.5, 5e-4, 0.77, 0.35};
  double peak = 0.0;
  for (double r = 0; r <= 100.0; r += 0.1) peak = std::max(peak, SteadyStateParametric(p, r));
  EXPECT_GT(peak, 0.90);
  EXPECT_LT(SteadyStateParametric(p, 100.0), peak);
}

TEST(SteadyStateParametric, NonPositiveDenominatorIsDomainError) {
  EXPECT_THROW(SteadyStateParametric({0.0, 0.0, 0.5, -1.0}, 2.0), std::domain_error);
}

TEST(SteadyStateParametric, InvariantUnderJointRescaling) {
  const SteadyStateParams p{0.3, 0.02, 0.7, 0.5};
  const double k = 3.7;
  const SteadyStateParams q{k * p.alpha, k * k * p.beta, p.gamma, k * p.delta};
  EXPECT_NEAR(SteadyStateParametric(p, 12.0), SteadyStateParametric(q, 12.0 / k), 1e-14);
}

TEST(DeriveParams, ScaleWithInverseGreenPower) {
  const MultiphotonRateModel m{1.0, 1.0, 0.05, 3.5, 6.69};
  const auto a = DeriveParams(m, 2.0);
  const auto b = DeriveParams(m, 4.0);
  EXPECT_NEAR(b.alpha, a.alpha / 2, 1e-15);
  EXPECT_NEAR(b.beta, a.beta / 2, 1e-15);
  EXPECT_NEAR(b.delta, a.delta / 2, 1e-15);
  EXPECT_DOUBLE_EQ(a.gamma, b.gamma);
}

TEST(DeriveParams, SymmetricVisibleOnlyModel) {
  MultiphotonRateModel m;
  m.c20 = m.d20 = 2.0;
  const auto p = DeriveParams(m, 1.0);
  EXPECT_DOUBLE_EQ(p.gamma, 0.5);
  EXPECT_DOUBLE_EQ(p.alpha, 0.0);
  EXPECT_DOUBLE_EQ(p.beta, 0.0);
  EXPECT_DOUBLE_EQ(p.delta, 0.0);
}

TEST(DeriveParams, Errors) {
  const MultiphotonRateModel m{1.0, 1.0, 0.0, 1.0, 1.0};
  EXPECT_THROW(DeriveParams(m, 0.0), std::domain_error);
  MultiphotonRateModel no_d20 = m;
  no_d20.d20 = 0.0;
  EXPECT_THROW(DeriveParams(no_d20, 1.0), std::domain_error);
}

TEST(RatioDiagnostics, RecoversConstructedRatios) {
  const MultiphotonRateModel m{0.22, 1.0, 6.69 * 7.4e-3, 0.78, 6.69};
  const auto d = ComputeRatioDiagnostics(DeriveParams(m, 3.0));
  EXPECT_NEAR(d.d11_over_c11, 6.69, 1e-9);
  EXPECT_NEAR(d.c12_over_d11, 7.4e-3, 1e-12);
  EXPECT_NEAR(d.d20_over_c20, 0.78 / 0.22, 1e-9);
  EXPECT_FALSE(d.d11_over_c11_unbounded);
}

TEST(RatioDiagnostics, UnboundedWhenNoNirIonization) {
  const auto d = ComputeRatioDiagnostics({1.0, 0.0, 1.0, 1.0});
  EXPECT_TRUE(d.d11_over_c11_unbounded);
  EXPECT_TRUE(std::isinf(d.d11_over_c11));
}

TEST(NirOnlyRate, TableValues) {
  EXPECT_DOUBLE_EQ(NirOnlyRate(kIonPoly, 0.0), 0.039);
  EXPECT_NEAR(NirOnlyRate(kRecPoly, 10.0), 5.1e-4 + 8.4e-3 + 1e-7, 1e-15);
  EXPECT_DOUBLE_EQ(NirOnlyRate({1.0, 1.0, 0.0}, 0.0), 0.0);
}

TEST(NirRatePolynomial, NegativeInsideValidRangeRejected) {
  EXPECT_THROW((NirRatePolynomial{-1e-6, 0.0, 0.1}).Validate(), std::invalid_argument);
  EXPECT_NO_THROW(kRecPoly.Validate());
}

TEST(DestructivityMatrix, MustBeColumnStochastic) {
  EXPECT_THROW(DestructivityMatrix({{{0.6, 0.05}, {0.35, 0.95}}}), std::invalid_argument);
}

TEST(NirEquilibrium, ZeroPowerGivesFixedPointOfReadout) {
  const NirRatePolynomial zero{4.7e-7, 0.0, 0.0};
  const NirRatePolynomial zero_rec{5.1e-7, 8.4e-5, 0.0};
  EXPECT_NEAR(NirEquilibrium(zero, zero_rec, 0.0, kReadoutD, 10.0).p_minus(),
              0.125, 1e-12);
}

TEST(NirEquilibrium, IdentityReadoutMatchesSteadyState) {
  const double r = 60.0;
  const double ion = NirOnlyRate(kIonPoly, r), rec = NirOnlyRate(kRecPoly, r);
  EXPECT_NEAR(NirEquilibrium(kIonPoly, kRecPoly, r, DestructivityMatrix::Identity(), 10.0)
                  .p_minus(),
              rec / (ion + rec), 1e-9);
}

TEST(NirEquilibrium, CycleMatrixIsStochasticWithUnitEigenvalue) {
  for (double r : {0.0, 20.0, 55.0, 100.0}) {
    const auto m = EvolutionMatrix(NirOnlyRate(kIonPoly, r), NirOnlyRate(kRecPoly, r), 10.0);
    const auto& d = kReadoutD.entries();
    double c[2][2];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) c[i][j] = m[i][0] * d[0][j] + m[i][1] * d[1][j];
    EXPECT_NEAR(c[0][0] + c[1][0], 1.0, 1e-12);
    EXPECT_NEAR(c[0][1] + c[1][1], 1.0, 1e-12);
    // The other eigenvalue of a 2x2 stochastic matrix is trace - 1.
    const double lambda_max = std::max(1.0, c[0][0] + c[1][1] - 1.0);
    EXPECT_NEAR(lambda_max, 1.0, 1e-9);
    const auto p = NirEquilibrium(kIonPoly, kRecPoly, r, kReadoutD, 10.0);
    EXPECT_GE(p.p_minus(), 0.0);
    EXPECT_NEAR(p.p_minus() + p.p_zero(), 1.0, 1e-9);
  }
}

TEST(NirEquilibrium, DegenerateCycleIsDomainError) {
  EXPECT_THROW(NirEquilibrium({0, 0, 0}, {0, 0, 0}, 10.0,
                              DestructivityMatrix::Identity(), 10.0),
               std::domain_error);
}

}  // namespace
}  // namespace nvreadout
