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

#include "nvreadout/readout_metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nvreadout {
namespace {

void RequireEfficiency(const SccEfficiency& eff) {
  if (!(eff.beta0 >= 0.0 && eff.beta0 <= 1.0 && eff.beta1 >= 0.0 &&
        eff.beta1 <= 1.0)) {
    throw std::invalid_argument("conversion efficiencies must lie in [0,1]");
  }
}

double BaselineSnr(const std::optional<double>& sigma,
                    const std::optional<double>& fidelity,
                    const std::optional<double>& a0,
                    const std::optional<double>& a1, bool* found) {
  *found = true;
  if (sigma) return SnrFromSigma(*sigma);
  if (fidelity) return SnrFromSigma(1.0 / *fidelity);
  if (a0 && a1) return std::abs(SnrPl(*a0, *a1));
  *found = false;
  return 0.0;
}

}  // namespace

SnrResult SnrThreshold(const SccEfficiency& eff) {
  RequireEfficiency(eff);
  const double variance =
      eff.beta0 * (1.0 - eff.beta0) + eff.beta1 * (1.0 - eff.beta1);
  const double diff = eff.beta0 - eff.beta1;
  if (variance == 0.0) {
    if (diff == 0.0) return {0.0, true};
    // Perfect, deterministic readout of distinct outcomes.
    return {diff > 0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity(),
            false};
  }
  return {diff / std::sqrt(variance), false};
}

double SpinFidelity(const SccEfficiency& eff) {
  RequireEfficiency(eff);
  return 0.5 * (1.0 + eff.beta0 - eff.beta1);
}

SignalMoments ComputeSignalMoments(const SccEfficiency& eff, double eta_zero,
                                   double eta_minus) {
  RequireEfficiency(eff);
  if (!(eta_zero >= 0.0) || !(eta_minus >= 0.0)) {
    throw std::invalid_argument("mean counts must be >= 0");
  }
  auto mean = [&](double b) { return b * eta_minus + (1.0 - b) * eta_zero; };
  SignalMoments m;
  m.alpha0 = mean(eff.beta0);
  m.alpha1 = mean(eff.beta1);
  // Algebraically E[X^2] - E[X]^2 = eta-mixture + b(1-b)(eta- - eta0)^2;
  // the closed form avoids cancellation at large counts.
  const double spread = eta_minus - eta_zero;
  m.var0 = m.alpha0 + eff.beta0 * (1.0 - eff.beta0) * spread * spread;
  m.var1 = m.alpha1 + eff.beta1 * (1.0 - eff.beta1) * spread * spread;
  return m;
}

double SnrSingleShot(const SccEfficiency& eff, double eta_zero,
                     double eta_minus) {
  const SignalMoments m = ComputeSignalMoments(eff, eta_zero, eta_minus);
  const double variance = m.var0 + m.var1;
  if (variance == 0.0) return 0.0;
  return (m.alpha0 - m.alpha1) / std::sqrt(variance);
}

double SnrPl(double alpha0, double alpha1) {
  if (!(alpha0 >= 0.0) || !(alpha1 >= 0.0)) {
    throw std::invalid_argument("mean counts must be >= 0");
  }
  if (alpha0 + alpha1 == 0.0) return 0.0;
  return (alpha0 - alpha1) / std::sqrt(alpha0 + alpha1);
}

double SpinReadoutNoise(const SccEfficiency& eff, double theta) {
  RequireEfficiency(eff);
  const double b0 = eff.beta0;
  const double b1 = eff.beta1;
  const double s = std::abs(std::sin(theta));
  const double contrast = std::abs(b1 - b0);
  if (s < 1e-15 || contrast == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  const double c = std::cos(theta);
  const double product =
      (2.0 - b0 - b1 - (b0 - b1) * c) * (b0 + b1 + (b0 - b1) * c);
  return std::sqrt(std::max(product, 0.0)) / (contrast * s);
}

double SnrFromSigma(double sigma_r) {
  if (!(sigma_r > 1.0)) {
    throw std::domain_error("spin readout noise must exceed 1");
  }
  return std::sqrt(2.0) / std::sqrt(sigma_r * sigma_r - 1.0);
}

double SigmaFromSnr(double snr) {
  if (snr == 0.0 || !std::isfinite(snr)) {
    throw std::domain_error("SNR must be finite and nonzero");
  }
  return std::sqrt(1.0 + 2.0 / (snr * snr));
}

std::vector<ComparisonRow> CompareTechniques(
    const std::vector<TechniqueRecord>& records) {
  std::vector<ComparisonRow> rows;
  rows.reserve(records.size());
  for (const TechniqueRecord& r : records) {
    ComparisonRow row;
    row.study = r.study;
    row.saturation_kcps = r.saturation_kcps;
    row.requirements = r.requirements;

    bool found = false;
    if (r.enhanced_snr) {
      row.single_shot_snr = std::abs(*r.enhanced_snr);
      found = true;
    } else if (r.enhanced_beta0 && r.enhanced_beta1) {
      row.single_shot_snr = std::abs(
          SnrThreshold({*r.enhanced_beta0, *r.enhanced_beta1}).snr);
      found = true;
    } else {
      row.single_shot_snr = BaselineSnr(r.enhanced_sigma_r,
                                         r.enhanced_fidelity, std::nullopt,
                                         std::nullopt, &found);
    }
    if (!found) {
      throw std::invalid_argument("technique '" + r.study +
                                  "' has no enhanced readout description");
    }

    bool have_baseline = false;
    const double baseline =
        BaselineSnr(r.baseline_sigma_r, r.baseline_fidelity, r.baseline_alpha0,
                     r.baseline_alpha1, &have_baseline);
    if (have_baseline && baseline > 0.0) {
      row.snr_gain = row.single_shot_snr / baseline;
    }
    if (r.optimal_beta0 && r.optimal_beta1) {
      row.optimal_snr =
          std::abs(SnrThreshold({*r.optimal_beta0, *r.optimal_beta1}).snr);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace nvreadout
