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

#include "nvreadout/protocol_optimizer.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "nvreadout/golden_section.h"
#include "nvreadout/readout_metrics.h"

namespace nvreadout {
namespace {

constexpr double kNsPerUs = 1e3;

void RequirePositiveDuration(double tau_us) {
  if (!(tau_us > 0.0) || !std::isfinite(tau_us)) {
    throw std::domain_error("readout duration must be finite and > 0");
  }
}

SpeedupRow EvaluateRow(const SccEfficiency& eff, const CountRateModel& model,
                       double t_pl_fixed_us, double pl_snr_sq,
                       double tau_init_us, double tau_op_us,
                       const OptimizerOptions& options) {
  const ReadoutOptimum opt =
      OptimizeReadout(eff, model, tau_init_us, tau_op_us, options);
  const double t_pl = (t_pl_fixed_us + tau_op_us) * 1e-6 / pl_snr_sq;
  return {tau_op_us, opt.tau_read_us, opt.snr_single_shot, opt.total_time_s,
          t_pl / opt.total_time_s, opt.multimodal};
}

}  // namespace

void CountRateModel::Validate() const {
  for (double v : {collection_efficiency, gamma_sat_mhz, bg_slope_kcps,
                   dark_rate_hz, tau_r0_ns}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("count-rate model fields must be > 0");
    }
  }
}

double ScaledPower(const CountRateModel& model, double tau_read_us) {
  RequirePositiveDuration(tau_read_us);
  return std::sqrt(model.tau_r0_ns / (tau_read_us * kNsPerUs));
}

CountRates ComputeCountRates(const CountRateModel& model, double tau_read_us) {
  model.Validate();
  const double x = ScaledPower(model, tau_read_us);
  const double dark_kcps = model.dark_rate_hz * 1e-3;
  return {model.saturated_kcps() * x / (1.0 + x) + dark_kcps,
          model.bg_slope_kcps * x + dark_kcps};
}

ExpectedCounts ComputeExpectedCounts(const CountRateModel& model,
                                     double tau_read_us) {
  if (tau_read_us == 0.0) return {};
  const CountRates rates = ComputeCountRates(model, tau_read_us);
  // kcps * us = 1e-3 counts
  return {rates.gamma_zero_kcps * tau_read_us * 1e-3,
          rates.gamma_minus_kcps * tau_read_us * 1e-3};
}

double CalibrateTauR0(const CountRateModel& model, double tau_read_us,
                      double gamma_minus_kcps) {
  RequirePositiveDuration(tau_read_us);
  const double fraction =
      (gamma_minus_kcps - model.dark_rate_hz * 1e-3) / model.saturated_kcps();
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::domain_error("measured NV- rate outside (dark, saturation)");
  }
  const double x = fraction / (1.0 - fraction);
  return x * x * tau_read_us * kNsPerUs;
}

double CalibrateBgSlope(const CountRateModel& model, double tau_read_us,
                        double gamma_zero_kcps) {
  const double x = std::sqrt(model.tau_r0_ns / (tau_read_us * kNsPerUs));
  const double above_dark = gamma_zero_kcps - model.dark_rate_hz * 1e-3;
  if (!(above_dark > 0.0)) {
    throw std::domain_error("measured NV0 rate must exceed the dark rate");
  }
  return above_dark / x;
}

double TotalTime(const TimingBudget& budget, double snr_single_shot) {
  if (snr_single_shot == 0.0 || !std::isfinite(snr_single_shot)) {
    throw std::domain_error("total time requires a finite nonzero SNR");
  }
  if (budget.tau_init_us < 0.0 || budget.tau_op_us < 0.0 ||
      budget.tau_read_us < 0.0) {
    throw std::invalid_argument("timing budget entries must be >= 0");
  }
  const double cycle_s =
      (budget.tau_init_us + budget.tau_op_us + budget.tau_read_us) * 1e-6;
  return cycle_s / (snr_single_shot * snr_single_shot);
}

double SccTotalTime(const SccEfficiency& eff, const CountRateModel& model,
                    double tau_init_us, double tau_op_us, double tau_read_us) {
  const ExpectedCounts counts = ComputeExpectedCounts(model, tau_read_us);
  const double snr = SnrSingleShot(eff, counts.eta_zero, counts.eta_minus);
  if (snr == 0.0) return std::numeric_limits<double>::infinity();
  return TotalTime({tau_init_us, tau_op_us, tau_read_us}, snr);
}

ReadoutOptimum OptimizeReadout(const SccEfficiency& eff,
                               const CountRateModel& model, double tau_init_us,
                               double tau_op_us,
                               const OptimizerOptions& options) {
  if (options.grid_points < 3) {
    throw std::invalid_argument("optimizer grid needs >= 3 points");
  }
  auto objective = [&](double log_tau) {
    return SccTotalTime(eff, model, tau_init_us, tau_op_us, std::exp(log_tau));
  };
  const double lo = std::log(options.tau_read_min_us);
  const double hi = std::log(options.tau_read_max_us);
  const int n = options.grid_points;
  const double step = (hi - lo) / (n - 1);

  std::vector<double> values(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) values[i] = objective(lo + step * i);

  const auto best_it = std::min_element(values.begin(), values.end());
  const int best = static_cast<int>(best_it - values.begin());
  if (!std::isfinite(*best_it)) {
    throw std::domain_error("SNR vanishes across the readout grid");
  }
  int local_minima = 0;
  for (int i = 0; i < n; ++i) {
    const bool left = i == 0 || values[i] < values[i - 1];
    const bool right = i == n - 1 || values[i] < values[i + 1];
    if (left && right) ++local_minima;
  }

  const double a = lo + step * std::max(best - 1, 0);
  const double b = lo + step * std::min(best + 1, n - 1);
  // A relative step of 1e-4 in tau moves T by far less than 1e-3 near an
  // interior minimum.
  ScalarMinimum refined = GoldenSectionMinimize(objective, a, b, 1e-4);
  if (!(refined.value <= *best_it)) {
    refined = {lo + step * best, *best_it, 0};
  }
  ReadoutOptimum out;
  out.tau_read_us = std::exp(refined.x);
  out.total_time_s = refined.value;
  const ExpectedCounts counts = ComputeExpectedCounts(model, out.tau_read_us);
  out.snr_single_shot = SnrSingleShot(eff, counts.eta_zero, counts.eta_minus);
  out.multimodal = local_minima > 1;
  return out;
}

double Speedup(const SccEfficiency& eff, const CountRateModel& model,
               const PlReadout& pl, double tau_init_us, double tau_op_us,
               const OptimizerOptions& options) {
  const double t_pl =
      TotalTime({tau_init_us, tau_op_us, pl.tau_read_us}, SnrPl(pl.alpha0, pl.alpha1));
  const double t_scc =
      OptimizeReadout(eff, model, tau_init_us, tau_op_us, options).total_time_s;
  return t_pl / t_scc;
}

std::vector<SpeedupRow> SpeedupSweep(const SccEfficiency& eff,
                                     const CountRateModel& model,
                                     const PlReadout& pl, double tau_init_us,
                                     std::span<const double> tau_op_us,
                                     const OptimizerOptions& options) {
  model.Validate();
  const double pl_snr = SnrPl(pl.alpha0, pl.alpha1);
  if (pl_snr == 0.0) throw std::domain_error("PL baseline has zero SNR");
  const double pl_snr_sq = pl_snr * pl_snr;
  const double t_pl_fixed_us = tau_init_us + pl.tau_read_us;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(tau_op_us.size());
  std::vector<SpeedupRow> rows(tau_op_us.size());
  // Exceptions cannot cross the parallel region; collect the first one.
  bool failed = false;
  std::string failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      rows[i] = EvaluateRow(eff, model, t_pl_fixed_us, pl_snr_sq, tau_init_us,
                            tau_op_us[i], options);
    } catch (const std::exception& e) {
#pragma omp critical
      {
        if (!failed) {
          failed = true;
          failure = e.what();
        }
      }
    }
  }
  if (failed) throw std::domain_error(failure);
  return rows;
}

std::vector<SpeedupRow> SpeedupSweepSerial(
    const SccEfficiency& eff, const CountRateModel& model, const PlReadout& pl,
    double tau_init_us, std::span<const double> tau_op_us,
    const OptimizerOptions& options) {
  model.Validate();
  const double pl_snr = SnrPl(pl.alpha0, pl.alpha1);
  if (pl_snr == 0.0) throw std::domain_error("PL baseline has zero SNR");
  std::vector<SpeedupRow> rows;
  rows.reserve(tau_op_us.size());
  for (double tau_op : tau_op_us) {
    rows.push_back(EvaluateRow(eff, model, tau_init_us + pl.tau_read_us,
                               pl_snr * pl_snr, tau_init_us, tau_op, options));
  }
  return rows;
}

std::vector<double> LogSpace(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > 0.0) || n < 1) {
    throw std::invalid_argument("log space needs positive bounds and n >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + step * i);
  out.back() = hi;
  return out;
}

}  // namespace nvreadout
