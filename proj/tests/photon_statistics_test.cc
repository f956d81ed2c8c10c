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


#include "nvreadout/photon_statistics.h"

#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.h"

namespace nvreadout {
namespace {

const PoissonMixture kReferenceReadout{0.45, 10.0, 0.5};

TEST(PoissonPmf, MatchesRecurrence) {
  const auto table = testing::BrutePoissonTable(10.0, 60);
  for (int n = 0; n <= 60; ++n) EXPECT_NEAR(PoissonPmf(n, 10.0), table[n], 1e-15);
  EXPECT_DOUBLE_EQ(PoissonPmf(0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(PoissonPmf(3, 0.0), 0.0);
}

TEST(PoissonCdf, TailsAreComplementary) {
  for (int n : {0, 2, 3, 9, 30}) {
    EXPECT_NEAR(PoissonCdf(n, 10.0), testing::BruteCdf(10.0, n), 1e-13);
    EXPECT_NEAR(PoissonCdf(n, 10.0) + PoissonUpperTail(n, 10.0), 1.0, 1e-14);
  }
}

TEST(PoissonTruncation, NegligibleMassBeyond) {
  for (double eta : {0.45, 10.0, 300.0}) {
    EXPECT_LT(PoissonUpperTail(PoissonTruncation(eta), eta), 1e-12);
  }
}

TEST(MixturePmf, DegenerateZeroMeans) {
  EXPECT_DOUBLE_EQ(MixturePmf({0.0, 0.0, 0.3}, 0), 1.0);
}

TEST(MixturePmf, ReferenceMeansAtZero) {
  EXPECT_NEAR(MixturePmf(kReferenceReadout, 0),
              0.5 * std::exp(-0.45) + 0.5 * std::exp(-10.0), 1e-15);
  EXPECT_NEAR(MixturePmf(kReferenceReadout, 0), 0.3188, 1e-4);
}

TEST(MixturePmf, Normalized) {
  double total = 0.0;
  for (double p : MixturePmfTable(kReferenceReadout, 200)) total += p;
  EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(Classify, StrictlyAboveByDefault) {
  EXPECT_EQ(Classify(0, 3), ChargeState::kNeutral);
  EXPECT_EQ(Classify(4, 3), ChargeState::kNegative);
  EXPECT_EQ(Classify(3, 3), ChargeState::kNeutral);
  EXPECT_EQ(Classify(3, 3, ThresholdConvention::kAtOrAbove), ChargeState::kNegative);
}

TEST(ChargeFidelity, ReferenceConfiguration) {
  const auto r = ChargeFidelity(kReferenceReadout, 3);
  EXPECT_NEAR(r.eps_zero, 1.0 - testing::BruteCdf(0.45, 3), 1e-14);
  EXPECT_NEAR(r.eps_minus, testing::BruteCdf(10.0, 3), 1e-14);
  EXPECT_NEAR(r.fidelity, 0.994, 5e-4);
  EXPECT_DOUBLE_EQ(r.fidelity, 1.0 - (r.eps_zero + r.eps_minus) / 2.0);
  const auto ge = ChargeFidelity(kReferenceReadout, 3, ThresholdConvention::kAtOrAbove);
  EXPECT_NEAR(ge.fidelity, 0.99318, 1e-5);
}

TEST(ChargeFidelity, IndistinguishableStates) {
  const PoissonMixture m{4.0, 4.0, 0.5};
  EXPECT_NEAR(ChargeFidelity(m, OptimalThreshold(m)).fidelity, 0.5, 1e-12);
}

TEST(ChargeFidelity, HugeThreshold) {
  const auto r = ChargeFidelity(kReferenceReadout, 500);
  EXPECT_NEAR(r.eps_zero, 0.0, 1e-15);
  EXPECT_NEAR(r.eps_minus, 1.0, 1e-15);
  EXPECT_NEAR(r.fidelity, 0.5, 1e-15);
}

TEST(OptimalThreshold, MatchesExhaustiveScan) {
  int best = 0;
  double best_f = -1.0;
  for (int t = 0; t <= 30; ++t) {
    const double f = ChargeFidelity(kReferenceReadout, t).fidelity;
    if (f > best_f) {
      best_f = f;
      best = t;
    }
  }
  const int t = OptimalThreshold(kReferenceReadout);
  EXPECT_EQ(t, best);
  EXPECT_TRUE(t == 2 || t == 3);
}

TEST(OptimalThreshold, DarkStateWithoutCounts) {
  EXPECT_EQ(OptimalThreshold({0.0, 10.0, 0.5}), 0);
}

TEST(OptimalThreshold, NearLikelihoodCrossing) {
  const PoissonMixture m{20.0, 80.0, 0.5};
  // Poisson likelihoods cross at n = (eta- - eta0) / ln(eta- / eta0).
  const double crossing = (80.0 - 20.0) / std::log(4.0);
  EXPECT_NEAR(OptimalThreshold(m), crossing, 1.0);
}

TEST(ChargeFidelity, MonotoneInBrightMean) {
  double last = 0.0;
  for (double eta = 1.0; eta <= 20.0; eta += 0.5) {
    const PoissonMixture m{0.45, eta, 0.5};
    const double f = ChargeFidelity(m, OptimalThreshold(m)).fidelity;
    EXPECT_GE(f, last - 1e-15);
    EXPECT_GE(f, 0.5);
    EXPECT_LE(f, 1.0);
    last = f;
  }
}

TEST(PostSelection, ZeroWindowReturnsPrior) {
  const auto prior = ChargePopulation::FromMinus(0.77);
  EXPECT_DOUBLE_EQ(PostSelectionPurity(kReferenceReadout, 0.0, 3.0, 0.01, prior), 0.77);
}

TEST(PostSelection, ReferenceVerification) {
  const auto prior = ChargePopulation::FromMinus(0.77);
  const double purity = PostSelectionPurity(kReferenceReadout, 0.42, 3.0, 0.01, prior);
  EXPECT_NEAR(purity, 0.968, 0.004);
}

TEST(PostSelection, DarkStateAndNoIonizationIsPerfect) {
  EXPECT_DOUBLE_EQ(PostSelectionPurity({0.0, 10.0, 0.5}, 0.5, 3.0, 0.0,
                                       ChargePopulation::FromMinus(0.5)),
                   1.0);
}

TEST(PhotonHistogram, ProbabilitiesAndTotals) {
  PhotonHistogram h{{1, 3, 0, 4}};
  EXPECT_EQ(h.total(), 8u);
  const auto p = h.Probabilities();
  EXPECT_DOUBLE_EQ(p[1], 3.0 / 8.0);
  EXPECT_THROW(PhotonHistogram{}.Probabilities(), std::invalid_argument);
}

TEST(TotalVariation, PadsShorterInput) {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<double> q{0.5, 0.25, 0.25};
  EXPECT_DOUBLE_EQ(TotalVariationDistance(p, q), 0.25);
}

}  // namespace
}  // namespace nvreadout
