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

#ifndef NVREADOUT_READOUT_METRICS_H_
#define NVREADOUT_READOUT_METRICS_H_

#include <optional>
#include <string>
#include <vector>

#include "nvreadout/scc_model.h"

namespace nvreadout {

// All SNR values are signed: positive when ms=0 is the brighter outcome.

struct SnrResult {
  double snr = 0.0;
  /// Set when numerator and denominator both vanish (beta0 = beta1 in {0,1}).
  bool degenerate = false;
};

/// Ideal charge readout, imperfect conversion:
/// (b0 - b1) / sqrt(b0(1-b0) + b1(1-b1)).
SnrResult SnrThreshold(const SccEfficiency& eff);

/// (1 + b0 - b1) / 2.
double SpinFidelity(const SccEfficiency& eff);

/// Per-spin photon-count mean and variance after conversion + readout.
struct SignalMoments {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double var0 = 0.0;
  double var1 = 0.0;
};

SignalMoments ComputeSignalMoments(const SccEfficiency& eff, double eta_zero,
                                   double eta_minus);

/// Photon-counting single-shot SNR including charge-readout shot noise:
/// (alpha0 - alpha1) / sqrt(var0 + var1).
double SnrSingleShot(const SccEfficiency& eff, double eta_zero,
                     double eta_minus);

/// Conventional fluorescence readout: (a0 - a1) / sqrt(a0 + a1).
double SnrPl(double alpha0, double alpha1);

/// Spin-readout noise relative to the standard quantum limit at spin
/// population angle theta (p0 = cos^2(theta/2)).  Returns +infinity where
/// sin(theta) = 0 or beta0 = beta1.
double SpinReadoutNoise(const SccEfficiency& eff, double theta);

/// SNR = sqrt(2) / sqrt(sigma^2 - 1); requires sigma > 1.
double SnrFromSigma(double sigma_r);
/// sigma = sqrt(1 + 2 / SNR^2); requires SNR != 0.
double SigmaFromSnr(double snr);

/// One row of a cross-technique comparison.  Exactly one of the readout
/// descriptions must be present for each of the baseline and enhanced
/// sides; `saturation_kcps` and `requirements` pass through unchanged.
struct TechniqueRecord {
  std::string study;
  // Baseline (conventional fluorescence) readout.
  std::optional<double> baseline_sigma_r;
  std::optional<double> baseline_fidelity;  // 1 / sigma_R
  std::optional<double> baseline_alpha0;
  std::optional<double> baseline_alpha1;
  // Enhanced readout.
  std::optional<double> enhanced_sigma_r;
  std::optional<double> enhanced_fidelity;
  std::optional<double> enhanced_beta0;
  std::optional<double> enhanced_beta1;
  std::optional<double> enhanced_snr;
  // Optimal-case enhanced readout, if known.
  std::optional<double> optimal_beta0;
  std::optional<double> optimal_beta1;
  std::optional<double> saturation_kcps;
  std::string requirements;
};

struct ComparisonRow {
  std::string study;
  double single_shot_snr = 0.0;          // |SNR| of the enhanced readout
  std::optional<double> snr_gain;        // enhanced / baseline
  std::optional<double> optimal_snr;
  std::optional<double> saturation_kcps;
  std::string requirements;
};

/// Throws std::invalid_argument if a record has no usable enhanced readout.
std::vector<ComparisonRow> CompareTechniques(
    const std::vector<TechniqueRecord>& records);

}  // namespace nvreadout

#endif  // NVREADOUT_READOUT_METRICS_H_
