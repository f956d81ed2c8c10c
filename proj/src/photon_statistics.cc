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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/poisson.hpp>

namespace nvreadout {
namespace {

void RequireMean(double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("Poisson mean must be finite and >= 0");
  }
}

void RequireOrdered(const PoissonMixture& m) {
  m.Validate();
  if (m.eta_minus < m.eta_zero) {
    throw std::invalid_argument(
        "classification requires eta_minus >= eta_zero (NV- is bright)");
  }
}

}  // namespace

void PoissonMixture::Validate() const {
  RequireMean(eta_zero);
  RequireMean(eta_minus);
  if (!(weight_minus >= 0.0 && weight_minus <= 1.0)) {
    throw std::invalid_argument("mixture weight must lie in [0,1]");
  }
}

double PoissonPmf(std::int64_t n, double eta) {
  RequireMean(eta);
  if (n < 0) return 0.0;
  if (eta == 0.0) return n == 0 ? 1.0 : 0.0;
  return boost::math::pdf(boost::math::poisson_distribution<>(eta),
                          static_cast<double>(n));
}

double PoissonCdf(std::int64_t n, double eta) {
  RequireMean(eta);
  if (n < 0) return 0.0;
  if (eta == 0.0) return 1.0;
  return boost::math::cdf(boost::math::poisson_distribution<>(eta),
                          static_cast<double>(n));
}

double PoissonUpperTail(std::int64_t n, double eta) {
  RequireMean(eta);
  if (n < 0) return 1.0;
  if (eta == 0.0) return 0.0;
  return boost::math::cdf(
      boost::math::complement(boost::math::poisson_distribution<>(eta),
                              static_cast<double>(n)));
}

std::int64_t PoissonTruncation(double eta) {
  RequireMean(eta);
  return static_cast<std::int64_t>(std::ceil(eta + 12.0 * std::sqrt(eta) + 20.0));
}

double MixturePmf(const PoissonMixture& m, std::int64_t n) {
  m.Validate();
  return m.weight_minus * PoissonPmf(n, m.eta_minus) +
         (1.0 - m.weight_minus) * PoissonPmf(n, m.eta_zero);
}

std::vector<double> MixturePmfTable(const PoissonMixture& m,
                                    std::int64_t n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  std::vector<double> table(static_cast<std::size_t>(n_max) + 1);
  for (std::int64_t n = 0; n <= n_max; ++n) {
    table[static_cast<std::size_t>(n)] = MixturePmf(m, n);
  }
  return table;
}

ChargeState Classify(std::int64_t photons, int threshold,
                     ThresholdConvention convention) {
  const bool bright = convention == ThresholdConvention::kStrictlyAbove
                          ? photons > threshold
                          : photons >= threshold;
  return bright ? ChargeState::kNegative : ChargeState::kNeutral;
}

ChargeReadoutReport ChargeFidelity(const PoissonMixture& m, int threshold,
                                   ThresholdConvention convention) {
  RequireOrdered(m);
  if (threshold < 0) throw std::invalid_argument("threshold must be >= 0");
  // Largest count still classified NV0.
  const std::int64_t last_dark =
      convention == ThresholdConvention::kStrictlyAbove ? threshold
                                                         : threshold - 1;
  ChargeReadoutReport report;
  report.threshold = threshold;
  report.eps_zero = PoissonUpperTail(last_dark, m.eta_zero);
  report.eps_minus = PoissonCdf(last_dark, m.eta_minus);
  report.fidelity = 1.0 - (report.eps_zero + report.eps_minus) / 2.0;
  return report;
}

int OptimalThreshold(const PoissonMixture& m, ThresholdConvention convention) {
  RequireOrdered(m);
  const int upper = static_cast<int>(std::ceil(3.0 * m.eta_minus));
  int best = 0;
  double best_fidelity = -1.0;
  for (int t = 0; t <= upper; ++t) {
    const double f = ChargeFidelity(m, t, convention).fidelity;
    if (f > best_fidelity) {
      best_fidelity = f;
      best = t;
    }
  }
  return best;
}

double PostSelectionPurity(const PoissonMixture& m, double verify_window_ms,
                           double readout_window_ref_ms,
                           double ionization_prob_during_verify,
                           const ChargePopulation& prior) {
  m.Validate();
  if (!(verify_window_ms >= 0.0)) {
    throw std::invalid_argument("verify window must be >= 0");
  }
  if (!(readout_window_ref_ms > 0.0)) {
    throw std::invalid_argument("reference readout window must be > 0");
  }
  if (!(ionization_prob_during_verify >= 0.0 &&
        ionization_prob_during_verify <= 1.0)) {
    throw std::invalid_argument("ionization probability must lie in [0,1]");
  }
  const double scale = verify_window_ms / readout_window_ref_ms;
  const double herald_minus = -std::expm1(-m.eta_minus * scale);
  const double herald_zero = -std::expm1(-m.eta_zero * scale);
  const double joint_minus = prior.p_minus() * herald_minus;
  const double evidence = joint_minus + prior.p_zero() * herald_zero;
  if (evidence == 0.0) return prior.p_minus();
  return joint_minus / evidence * (1.0 - ionization_prob_during_verify);
}

std::uint64_t PhotonHistogram::total() const {
  return std::accumulate(occurrences.begin(), occurrences.end(),
                         std::uint64_t{0});
}

std::vector<double> PhotonHistogram::Probabilities() const {
  const std::uint64_t n = total();
  if (n == 0) throw std::invalid_argument("empty histogram");
  std::vector<double> p(occurrences.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = static_cast<double>(occurrences[i]) / static_cast<double>(n);
  }
  return p;
}

double TotalVariationDistance(std::span<const double> p,
                              std::span<const double> q) {
  const std::size_t n = std::max(p.size(), q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    sum += std::abs(a - b);
  }
  return 0.5 * sum;
}

}  // namespace nvreadout
