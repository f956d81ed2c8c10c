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

#ifndef NVREADOUT_ESTIMATION_H_
#define NVREADOUT_ESTIMATION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nvreadout/charge_dynamics.h"
#include "nvreadout/photon_statistics.h"
#include "nvreadout/scc_model.h"

namespace nvreadout {

// Two-sided Gaussian quantiles used for confidence half-widths.
inline constexpr double kZ65 = 0.935;  // 65% error-bar convention
inline constexpr double kZ95 = 1.959964;

struct FitResult {
  std::vector<std::string> names;
  std::vector<std::string> units;
  Eigen::VectorXd values;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd ci65;  // half-widths
  Eigen::VectorXd ci95;
  double r_squared = 0.0;
  double chi_squared = 0.0;
  int dof = 0;
  int iterations = 0;
  bool converged = false;
  /// Machine-readable diagnostics, e.g. "lifetime_unidentifiable".
  std::vector<std::string> flags;

  std::size_t index(const std::string& name) const;
  double value(const std::string& name) const { return values(index(name)); }
  double sigma(const std::string& name) const;
  bool has_flag(const std::string& flag) const;
};

// Rate polynomials ------------------------------------------------------------

struct RatePoint {
  double power_mw = 0.0;
  double rate_khz = 0.0;
  double error_khz = 0.0;
};

/// Weighted linear fit of a R^3 + b R^2 + c; b is held at zero (and
/// reported with zero variance) unless include_quadratic is set.
FitResult FitRatePolynomial(const std::vector<RatePoint>& data,
                            bool include_quadratic);

NirRatePolynomial ToNirRatePolynomial(const FitResult& fit);

// Steady-state charge curves ----------------------------------------------------

struct SteadyStatePoint {
  double nir_mw = 0.0;
  double p_minus = 0.0;
  double error = 0.0;
};

/// Nonlinear weighted fit of gamma(1+alpha R)/(1+delta R+beta R^2) with
/// alpha, beta, delta >= 0 and gamma in [0,1].  Needs at least 5 points.
FitResult FitSteadyState(const std::vector<SteadyStatePoint>& data);

SteadyStateParams ToSteadyStateParams(const FitResult& fit);

// Photon histograms -------------------------------------------------------------

struct MixtureFitOptions {
  int max_iterations = 10000;
  double relative_tolerance = 1e-12;
};

/// Maximum-likelihood two-Poisson fit by expectation-maximization.  The
/// result's `iterations` counts EM steps; `log_likelihood_history` (if
/// given) receives the log likelihood after every step.  When a single
/// Poisson explains the data as well as the mixture, weight_minus is set
/// to 1 and "degenerate_eta_zero" is flagged.
FitResult FitPoissonMixture(const PhotonHistogram& histogram,
                            const MixtureFitOptions& options = {},
                            std::vector<double>* log_likelihood_history = nullptr);

PoissonMixture ToPoissonMixture(const FitResult& fit);

// Exponential decay ---------------------------------------------------------------

struct DecayPoint {
  double delay_ns = 0.0;
  double value = 0.0;
  double error = 0.0;  // <= 0: unknown, scale covariance by residual variance
};

/// value = amplitude exp(-delay/lifetime) + offset.  Flags
/// "lifetime_unidentifiable" when the amplitude is not resolved from zero.
FitResult FitExponential(const std::vector<DecayPoint>& data);

// Multi-cycle spin-to-charge conversion ----------------------------------------------

struct SccPoint {
  int cycles = 0;
  double nv_minus = 0.0;
  double error = 0.0;        // <= 0: use the binomial error from `shots`
  std::int64_t shots = 0;
};

struct SccFitOptions {
  double p_ion = 0.005;  // held fixed
  /// Starting point; fields other than p_ion are free.
  SccParams initial{0.005, 0.1, 0.2, 0.3, 2.0, 0.8, 0.05};
};

/// Joint bounded fit of (charge_init_nv0, k35, k45, p_sing, k51_over_k52,
/// spin_init) to both spin preparations; either dataset may be empty.
FitResult FitSccJoint(const std::vector<SccPoint>& ms0,
                      const std::vector<SccPoint>& ms1,
                      const SccFitOptions& options = {});

SccParams ToSccParams(const FitResult& fit, double p_ion);

// Transition counting ---------------------------------------------------------------

struct RateEstimate {
  double rate_khz = 0.0;
  double error_khz = 0.0;
  /// 95% one-sided upper bound; set when no transitions were seen.
  std::optional<double> upper_bound_khz;
};

/// rate = (k/n)/duration with binomial error.  With `log_corrected`,
/// rate = -ln(1 - k/n)/duration (exact for a Poisson process at any k/n).
RateEstimate RateFromTransitions(std::int64_t transitions, std::int64_t trials,
                                 double pulse_duration_ms,
                                 bool log_corrected = false);

}  // namespace nvreadout

#endif  // NVREADOUT_ESTIMATION_H_
