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

#ifndef NVREADOUT_PHOTON_STATISTICS_H_
#define NVREADOUT_PHOTON_STATISTICS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "nvreadout/charge_dynamics.h"

namespace nvreadout {

enum class ChargeState { kNegative, kNeutral };

/// Which side of the threshold a count equal to the threshold falls on.
/// kStrictlyAbove: NV- iff n > threshold (default).
/// kAtOrAbove:     NV- iff n >= threshold.
enum class ThresholdConvention { kStrictlyAbove, kAtOrAbove };

/// Two-component Poisson photon-count model of a charge readout window.
struct PoissonMixture {
  double eta_zero = 0.0;      // mean counts from NV0
  double eta_minus = 0.0;     // mean counts from NV-
  double weight_minus = 0.5;  // P(NV-)

  void Validate() const;
};

struct ChargeReadoutReport {
  int threshold = 0;
  double eps_zero = 0.0;   // P(classified NV- | NV0)
  double eps_minus = 0.0;  // P(classified NV0 | NV-)
  double fidelity = 0.0;   // 1 - (eps_zero + eps_minus)/2
};

// Single-Poisson helpers; eta = 0 is the point mass at n = 0.
double PoissonPmf(std::int64_t n, double eta);
/// P(N <= n).
double PoissonCdf(std::int64_t n, double eta);
/// P(N > n), computed without cancellation.
double PoissonUpperTail(std::int64_t n, double eta);
/// Count beyond which a Poisson(eta) has less than 1e-12 mass:
/// eta + 12 sqrt(eta) + 20.
std::int64_t PoissonTruncation(double eta);

double MixturePmf(const PoissonMixture& m, std::int64_t n);

/// pmf for n = 0..n_max inclusive.
std::vector<double> MixturePmfTable(const PoissonMixture& m,
                                    std::int64_t n_max);

ChargeState Classify(std::int64_t photons, int threshold,
                     ThresholdConvention convention =
                         ThresholdConvention::kStrictlyAbove);

/// Misclassification rates and fidelity at a threshold.  Requires
/// eta_minus >= eta_zero.
ChargeReadoutReport ChargeFidelity(
    const PoissonMixture& m, int threshold,
    ThresholdConvention convention = ThresholdConvention::kStrictlyAbove);

/// Smallest threshold in [0, ceil(3 eta_minus)] that maximizes fidelity.
int OptimalThreshold(const PoissonMixture& m,
                     ThresholdConvention convention =
                         ThresholdConvention::kStrictlyAbove);

/// Purity of NV- after heralding on >= 1 photon in a short verify window.
/// Both mean counts in `m` refer to `readout_window_ref_ms` and are scaled
/// linearly to `verify_window_ms`.  The Bayes posterior P(NV- | n >= 1)
/// is multiplied by (1 - ionization_prob_during_verify).  A zero-length
/// window carries no information and returns prior.p_minus().
double PostSelectionPurity(const PoissonMixture& m, double verify_window_ms,
                           double readout_window_ref_ms,
                           double ionization_prob_during_verify,
                           const ChargePopulation& prior);

/// Photon-count histogram; index is the photon number.
struct PhotonHistogram {
  std::vector<std::uint64_t> occurrences;

  std::uint64_t total() const;
  std::vector<double> Probabilities() const;
};

/// 0.5 * sum |p_i - q_i|; the shorter input is zero-padded.
double TotalVariationDistance(std::span<const double> p,
                              std::span<const double> q);

}  // namespace nvreadout

#endif  // NVREADOUT_PHOTON_STATISTICS_H_
