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


#include "nvreadout/monte_carlo.h"

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>
#include <omp.h>

#include "nvreadout/estimation.h"
#include "nvreadout/rng.h"

namespace nvreadout {
namespace {

constexpr double kBrightKcps = 3.37;
constexpr double kDarkKcps = 0.15;

double Tv(const PhotonHistogram& h, const PoissonMixture& m) {
  const auto empirical = h.Probabilities();
  const auto n_max = std::max<std::int64_t>(static_cast<std::int64_t>(empirical.size()),
                                            PoissonTruncation(m.eta_minus));
  return TotalVariationDistance(empirical, MixturePmfTable(m, n_max));
}

TEST(CounterRng, DeterministicAndDistinctStreams) {
  CounterRng a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
  CounterRng u(1, 0);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.Uniform();
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += v;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 3 * std::sqrt(1.0 / 12 / 100000));
}

TEST(RunSequence, PurePoissonMean) {
  const PulseSegment s{1.0, 0.0, 0.0, 10.0, 0.0, true};
  const SequenceRecords r = RunSequence({s}, ChargePopulation::Negative(), {1, 100000});
  double sum = 0;
  for (std::int64_t i = 0; i < r.shots; ++i) sum += static_cast<double>(r.photon_count(i, 0));
  EXPECT_NEAR(sum / r.shots, 10.0, 3 * std::sqrt(10.0 / r.shots));
  EXPECT_DOUBLE_EQ(r.FinalMinusFraction(), 1.0);
}

TEST(RunSequence, ZeroSwitchingCountsPassChiSquare) {
  const PulseSegment s{1.0, 0.0, 0.0, 10.0, 0.0, true};
  const PhotonHistogram h =
      RunSequence({s}, ChargePopulation::Negative(), {2024, 20000}).Histogram(0);
  const double n = static_cast<double>(h.total());
  double chi2 = 0;
  int bins = 0;
  double pooled_obs = 0, pooled_exp = 0;
  for (std::int64_t k = 0; k < 60; ++k) {
    const double obs = k < static_cast<std::int64_t>(h.occurrences.size())
                           ? static_cast<double>(h.occurrences[k]) : 0.0;
    pooled_obs += obs;
    pooled_exp += n * PoissonPmf(k, 10.0);
    if (pooled_exp >= 5.0) {
      chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
      ++bins;
      pooled_obs = pooled_exp = 0;
    }
  }
  const double p_value = boost::math::gamma_q((bins - 1) / 2.0, chi2 / 2.0);
  EXPECT_GT(p_value, 0.01);
}

TEST(ChargeHistogram, MatchesMixtureAtReadoutRates) {
  const ChargeReadoutSetup setup{3.0, kBrightKcps, kDarkKcps, 0.0, 0.0};
  const PoissonMixture m{kDarkKcps * 3.0, kBrightKcps * 3.0, 0.5};
  const PhotonHistogram h =
      SimulateChargeHistogram(setup, ChargePopulation::FromMinus(0.5), {7, 100000});
  EXPECT_EQ(h.total(), 100000u);
  EXPECT_LT(Tv(h, m), 0.01);
}

TEST(ChargeHistogram, SlowSwitchingStillClose) {
  const ChargeReadoutSetup setup{3.0, kBrightKcps, kDarkKcps, 0.001, 0.002};
  const PoissonMixture m{kDarkKcps * 3.0, kBrightKcps * 3.0, 0.7};
  const PhotonHistogram h =
      SimulateChargeHistogram(setup, ChargePopulation::FromMinus(0.7), {8, 100000});
  EXPECT_LT(Tv(h, m), 0.01);
}

TEST(ChargeHistogram, TvShrinksLikeInverseRootShots) {
  const ChargeReadoutSetup setup{3.0, kBrightKcps, kDarkKcps, 0.0, 0.0};
  const PoissonMixture m{kDarkKcps * 3.0, kBrightKcps * 3.0, 0.5};
  std::vector<double> scaled;
  for (std::int64_t shots : {1000, 10000, 100000}) {
    double tv = 0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      tv += Tv(SimulateChargeHistogram(setup, ChargePopulation::FromMinus(0.5), {seed, shots}), m);
    }
    scaled.push_back(tv / 8 * std::sqrt(static_cast<double>(shots)));
  }
  for (double s : scaled) {
    EXPECT_GT(s, 0.5 * scaled[1]);
    EXPECT_LT(s, 2.0 * scaled[1]);
  }
}

TEST(ChargeHistogram, ZeroShotsIsError) {
  EXPECT_THROW(SimulateChargeHistogram({3.0, 1, 1, 0, 0}, ChargePopulation::Negative(), {1, 0}),
               std::invalid_argument);
}

TEST(RunSequence, LongSegmentReachesSteadyState) {
  const PulseSegment s{20.0, 1.0, 3.0, 0.0, 0.0, false};
  const SequenceRecords r = RunSequence({s}, ChargePopulation::Neutral(), {3, 20000});
  const double p = 3.0 / 4.0;
  EXPECT_NEAR(r.FinalMinusFraction(), p, 3 * std::sqrt(p * (1 - p) / r.shots));
}

TEST(RunSequence, TransientMatchesEvolve) {
  const std::vector<PulseSegment> seq = {{0.4, 0.5, 2.0, 0.0, 0.0, false},
                                         {0.7, 3.0, 0.2, 5.0, 1.0, true}};
  const SequenceRecords r = RunSequence(seq, ChargePopulation::FromMinus(0.3), {4, 50000});
  const ChargePopulation mid = Evolve(ChargePopulation::FromMinus(0.3), 0.5, 2.0, 0.4);
  const double p = Evolve(mid, 3.0, 0.2, 0.7).p_minus();
  EXPECT_NEAR(r.FinalMinusFraction(), p, 3 * std::sqrt(p * (1 - p) / r.shots));
  EXPECT_EQ(r.recorded_segments, 1);
}

TEST(RunSequence, EventCapThrows) {
  const PulseSegment s{1.0, 1e9, 1e9, 0.0, 0.0, false};
  EXPECT_THROW(RunSequence({s}, ChargePopulation::Negative(), {1, 2}), std::runtime_error);
}

TEST(RunSequence, InvalidSegmentsRejected) {
  EXPECT_THROW(RunSequence({{-1.0, 0, 0, 0, 0, false}}, ChargePopulation::Negative(), {1, 2}),
               std::invalid_argument);
  EXPECT_THROW(RunSequence({{1.0, -1, 0, 0, 0, false}}, ChargePopulation::Negative(), {1, 2}),
               std::invalid_argument);
}

TEST(RunSequence, ParallelMatchesSerialForAnyThreadCount) {
  const std::vector<PulseSegment> seq = {{0.5, 0.2, 1.0, 0.0, 0.0, false},
                                         {3.0, 0.05, 0.02, kBrightKcps, kDarkKcps, true}};
  const TrajectoryConfig config{123, 20000};
  const SequenceRecords ref = RunSequenceSerial(seq, ChargePopulation::FromMinus(0.7), config);
  for (int threads : {1, 2, 3, 8}) {
    omp_set_num_threads(threads);
    const SequenceRecords r = RunSequence(seq, ChargePopulation::FromMinus(0.7), config);
    EXPECT_EQ(r.photons, ref.photons) << threads;
    EXPECT_EQ(r.final_minus, ref.final_minus) << threads;
    EXPECT_EQ(r.initial_minus, ref.initial_minus) << threads;
  }
}

TEST(RateExperiment, NoRateNoTransitions) {
  const TransitionCounts c = SimulateRateExperiment(0.0, 0.0, 1.0, {5, 10000});
  EXPECT_EQ(c.ionizations, 0);
  EXPECT_EQ(c.recombinations, 0);
  EXPECT_EQ(c.trials_from_minus, 10000);
  EXPECT_EQ(c.trials_from_zero, 10000);
}

TEST(RateExperiment, RecoversRateWithinTwoSigma) {
  const TransitionCounts a = SimulateRateExperiment(0.1, 0.0, 0.5, {6, 10000});
  const RateEstimate ion = RateFromTransitions(a.ionizations, a.trials_from_minus, 0.5);
  EXPECT_NEAR(ion.rate_khz, 0.1, 2 * ion.error_khz);
  const TransitionCounts b = SimulateRateExperiment(0.0, 0.1, 0.5, {7, 10000});
  const RateEstimate rec = RateFromTransitions(b.recombinations, b.trials_from_zero, 0.5);
  EXPECT_NEAR(rec.rate_khz, 0.1, 2 * rec.error_khz);
  EXPECT_EQ(a.recombinations, 0);
  EXPECT_EQ(b.ionizations, 0);
}

TEST(RateExperiment, DestructiveVerifySetsFloor) {
  const TransitionCounts c = SimulateRateExperiment(0.0, 0.0, 1.0, {9, 20000}, 0.04);
  const double f = static_cast<double>(c.ionizations) / c.trials_from_minus;
  EXPECT_NEAR(f, 0.04, 3 * std::sqrt(0.04 * 0.96 / c.trials_from_minus));
  const RateEstimate floor_rate = RateFromTransitions(c.ionizations, c.trials_from_minus, 1.0);
  EXPECT_GT(floor_rate.rate_khz, 0.03);
}

SccParams ReferenceScc() {
  SccParams p;
  p.p_ion = 0.005;
  p.k35 = 0.033;
  p.k45 = 0.25;
  p.p_sing = 0.32;
  p.k51_over_k52 = 2.26;
  p.spin_init = 0.85;
  p.charge_init_nv0 = 0.04;
  return p;
}

TEST(SimulateScc, NoCyclesLeavesInitialCharge) {
  const SccSimulation s = SimulateScc(ReferenceScc(), 0, {10, 100000});
  EXPECT_NEAR(s.beta0, 0.96, 3 * s.beta0_error);
  EXPECT_NEAR(s.beta1, 0.96, 3 * s.beta1_error);
}

TEST(SimulateScc, MatchesTransferMatrices) {
  const SccEfficiency exact = SccEfficiencies(ReferenceScc(), 10);
  const SccSimulation s = SimulateScc(ReferenceScc(), 10, {11, 100000});
  EXPECT_NEAR(s.beta0, exact.beta0, 3 * s.beta0_error);
  EXPECT_NEAR(s.beta1, exact.beta1, 3 * s.beta1_error);
}

TEST(SimulateScc, FullShelvingIonizesEverything) {
  SccParams p;
  p.p_ion = 0.005;
  p.k45 = 1.0;
  p.p_sing = 1.0;
  p.spin_init = 1.0;
  const SccSimulation s = SimulateScc(p, 1, {12, 10000});
  EXPECT_EQ(s.beta1, 0.0);
  EXPECT_NEAR(s.beta0, 0.995, 3 * std::sqrt(0.005 * 0.995 / 10000) + 1e-12);
}

TEST(SimulateScc, ParallelMatchesSerial) {
  const TrajectoryConfig config{77, 5000};
  const SccSimulation ref = SimulateSccSerial(ReferenceScc(), 7, config);
  for (int threads : {1, 4}) {
    omp_set_num_threads(threads);
    const SccSimulation s = SimulateScc(ReferenceScc(), 7, config);
    EXPECT_EQ(s.beta0, ref.beta0);
    EXPECT_EQ(s.beta1, ref.beta1);
  }
}

}  // namespace
}  // namespace nvreadout
