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

#ifndef NVREADOUT_PROTOCOL_OPTIMIZER_H_
#define NVREADOUT_PROTOCOL_OPTIMIZER_H_

#include <span>
#include <vector>

#include "nvreadout/scc_model.h"

namespace nvreadout {

// Time-averaged readout planning.  Readout power is tied to the readout
// duration by P/P_sat = sqrt(tau_r0 / tau_read), which holds the quadratic
// ionization rate below 1/tau_read at every duration.

/// Charge-state-resolved count rates as a function of scaled power x:
///   gamma_minus = c * Gamma_sat * x / (1 + x) + dark
///   gamma_zero  = bg_slope * x + dark
struct CountRateModel {
  double collection_efficiency = 0.005;
  double gamma_sat_mhz = 50.0;
  double bg_slope_kcps = 0.0;  // NV0 count rate at x = 1, dark counts excluded
  double dark_rate_hz = 20.0;
  double tau_r0_ns = 550.0;    // readout duration at which x reaches 1

  void Validate() const;
  /// Asymptotic NV- count rate c * Gamma_sat, in kcps.
  double saturated_kcps() const { return collection_efficiency * gamma_sat_mhz * 1e3; }
};

struct TimingBudget {
  double tau_init_us = 0.0;
  double tau_op_us = 0.0;
  double tau_read_us = 0.0;
};

struct CountRates {
  double gamma_minus_kcps = 0.0;
  double gamma_zero_kcps = 0.0;
};

struct ExpectedCounts {
  double eta_zero = 0.0;
  double eta_minus = 0.0;
};

/// Conventional fluorescence readout used as the speedup baseline.
struct PlReadout {
  double alpha0 = 0.05;
  double alpha1 = 0.035;
  double tau_read_us = 0.2;
};

double ScaledPower(const CountRateModel& model, double tau_read_us);
CountRates ComputeCountRates(const CountRateModel& model, double tau_read_us);
ExpectedCounts ComputeExpectedCounts(const CountRateModel& model,
                                     double tau_read_us);

/// tau_r0 such that gamma_minus(tau_read) equals the measured rate.
double CalibrateTauR0(const CountRateModel& model, double tau_read_us,
                      double gamma_minus_kcps);
/// bg_slope such that gamma_zero(tau_read) equals the measured rate.
double CalibrateBgSlope(const CountRateModel& model, double tau_read_us,
                        double gamma_zero_kcps);

/// (tau_init + tau_op + tau_read) / SNR^2, in seconds: the integration time
/// to reach a time-averaged SNR of 1.  Requires snr != 0.
double TotalTime(const TimingBudget& budget, double snr_single_shot);

struct ReadoutOptimum {
  double tau_read_us = 0.0;
  double total_time_s = 0.0;
  double snr_single_shot = 0.0;
  /// Set when the coarse grid shows more than one local minimum; the
  /// returned point is then the refined global grid minimum.
  bool multimodal = false;
};

struct OptimizerOptions {
  double tau_read_min_us = 0.1;
  double tau_read_max_us = 1e5;
  int grid_points = 200;
  double relative_tolerance = 1e-3;
};

/// Total time for SCC readout at a given readout duration.
double SccTotalTime(const SccEfficiency& eff, const CountRateModel& model,
                    double tau_init_us, double tau_op_us, double tau_read_us);

/// Minimizes SccTotalTime over tau_read: coarse log grid, then golden
/// section in log(tau_read) around the best grid point.
ReadoutOptimum OptimizeReadout(const SccEfficiency& eff,
                               const CountRateModel& model, double tau_init_us,
                               double tau_op_us,
                               const OptimizerOptions& options = {});

/// T_PL / T_SCC with the SCC readout duration optimized.
double Speedup(const SccEfficiency& eff, const CountRateModel& model,
               const PlReadout& pl, double tau_init_us, double tau_op_us,
               const OptimizerOptions& options = {});

struct SpeedupRow {
  double tau_op_us = 0.0;
  double tau_read_opt_us = 0.0;
  double snr_ss = 0.0;
  double total_time_s = 0.0;
  double speedup = 0.0;
  bool multimodal = false;
};

/// One row per operation time.  Grid points are evaluated in parallel
/// (OpenMP when available); rows come back in input order.
std::vector<SpeedupRow> SpeedupSweep(const SccEfficiency& eff,
                                     const CountRateModel& model,
                                     const PlReadout& pl, double tau_init_us,
                                     std::span<const double> tau_op_us,
                                     const OptimizerOptions& options = {});

/// Single-threaded reference for SpeedupSweep.
std::vector<SpeedupRow> SpeedupSweepSerial(
    const SccEfficiency& eff, const CountRateModel& model, const PlReadout& pl,
    double tau_init_us, std::span<const double> tau_op_us,
    const OptimizerOptions& options = {});

/// n log-spaced points from lo to hi inclusive.
std::vector<double> LogSpace(double lo, double hi, int n);

}  // namespace nvreadout

#endif  // NVREADOUT_PROTOCOL_OPTIMIZER_H_
