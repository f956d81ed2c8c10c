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

#ifndef NVREADOUT_CHARGE_DYNAMICS_H_
#define NVREADOUT_CHARGE_DYNAMICS_H_

#include <array>

namespace nvreadout {

// Unit conventions at every API boundary in this header:
//   visible (green / orange) power  -> microwatts
//   NIR power                       -> milliwatts
//   rates                           -> kHz (1/ms)
//   times                           -> ms

/// Probability pair over the two charge states {NV-, NV0}.
class ChargePopulation {
 public:
  /// Throws std::invalid_argument unless both entries lie in [0,1] and sum to
  /// one within 1e-12.
  ChargePopulation(double p_minus, double p_zero);

  static ChargePopulation FromMinus(double p_minus);
  static ChargePopulation Negative() { return FromMinus(1.0); }
  static ChargePopulation Neutral() { return FromMinus(0.0); }

  double p_minus() const { return p_minus_; }
  double p_zero() const { return p_zero_; }

 private:
  double p_minus_;
  double p_zero_;
};

/// Phenomenological multiphoton ionization/recombination coefficients.
/// Ionization: c20 G^2 + c11 G R + c12 G R^2.  Recombination: d20 G^2 + d11 G R.
/// Coefficient units are kHz / (uW^m mW^n) for m visible and n NIR photons.
struct MultiphotonRateModel {
  double c20 = 0.0;
  double c11 = 0.0;
  double c12 = 0.0;
  double d20 = 0.0;
  double d11 = 0.0;

  /// Throws std::invalid_argument on a negative or non-finite coefficient.
  void Validate() const;
};

/// Reduced parameters of p_minus(R) = gamma (1 + alpha R) / (1 + delta R + beta R^2).
struct SteadyStateParams {
  double alpha = 0.0;  // 1/mW
  double beta = 0.0;   // 1/mW^2
  double gamma = 0.0;  // probability
  double delta = 0.0;  // 1/mW

  void Validate() const;
};

/// NIR-only rate gamma(R) = a R^3 + b R^2 + c, in kHz with R in mW.
/// Valid (fitted) range is [0, 100] mW; larger powers are extrapolation.
struct NirRatePolynomial {
  double a = 0.0;  // kHz/mW^3
  double b = 0.0;  // kHz/mW^2
  double c = 0.0;  // kHz

  static constexpr double kValidMaxMw = 100.0;

  /// Throws std::invalid_argument if the polynomial goes negative anywhere
  /// in [0, kValidMaxMw].
  void Validate() const;
};

/// Readout backaction: column-stochastic P(final charge | initial charge).
/// Index 0 is NV-, index 1 is NV0; entry(i, j) = P(final i | initial j).
/// Not to be confused with the recombination coefficients d20/d11.
class DestructivityMatrix {
 public:
  /// Row-major {{m00, m01}, {m10, m11}}.
  explicit DestructivityMatrix(const std::array<std::array<double, 2>, 2>& m);

  static DestructivityMatrix Identity();

  double operator()(int row, int col) const { return m_[row][col]; }
  const std::array<std::array<double, 2>, 2>& entries() const { return m_; }

 private:
  std::array<std::array<double, 2>, 2> m_;
};

// Rates ----------------------------------------------------------------------

double IonizationRate(const MultiphotonRateModel& model, double green_uw,
                      double nir_mw);
double RecombinationRate(const MultiphotonRateModel& model, double green_uw,
                         double nir_mw);
double NirOnlyRate(const NirRatePolynomial& poly, double nir_mw);

// Two-state evolution ---------------------------------------------------------

/// Closed-form solution of the two-state master equation after t_ms.
/// With both rates zero the population is returned unchanged.
ChargePopulation Evolve(const ChargePopulation& initial, double gamma_ion_khz,
                        double gamma_rec_khz, double t_ms);

/// 2x2 column-stochastic propagator of the master equation over t_ms.
/// Column j is Evolve() applied to the pure state j.
std::array<std::array<double, 2>, 2> EvolutionMatrix(double gamma_ion_khz,
                                                     double gamma_rec_khz,
                                                     double t_ms);

/// p_minus = gamma_rec / (gamma_ion + gamma_rec) at the given powers.
/// Throws std::domain_error if both rates vanish (no unique steady state).
ChargePopulation SteadyState(const MultiphotonRateModel& model, double green_uw,
                             double nir_mw);

/// Evaluates gamma (1 + alpha R)/(1 + delta R + beta R^2).
/// Throws std::domain_error if the denominator is not positive.
double SteadyStateParametric(const SteadyStateParams& params, double nir_mw);

/// Reduces a rate model at fixed green power to (alpha, beta, gamma, delta).
/// alpha, beta and delta scale as 1/G; gamma is independent of G.
SteadyStateParams DeriveParams(const MultiphotonRateModel& model,
                               double green_uw);

/// Relative coefficient strengths recoverable from a steady-state fit.
struct RatioDiagnostics {
  /// D11/C11 from alpha/delta = [D11/(D11+C11)] / gamma.  +inf when C11 = 0
  /// (gamma alpha/delta >= 1); `d11_over_c11_unbounded` is then set.
  double d11_over_c11 = 0.0;
  bool d11_over_c11_unbounded = false;
  /// C12/D11 = (beta/alpha)/gamma.
  double c12_over_d11 = 0.0;
  /// D20/C20 = gamma/(1-gamma).  A reported "R11/C11 = 3.5" for a 78%
  /// visible-only population matches this ratio (0.78/0.22 = 3.55); the
  /// quantity R11 has no other definition, so only D20/C20 is exposed.
  double d20_over_c20 = 0.0;
};

RatioDiagnostics ComputeRatioDiagnostics(const SteadyStateParams& params);

/// Fixed point of one NIR-only measurement cycle p' = [M(R) D] p, where M(R)
/// integrates the NIR-only rates over t_interact_ms and D is applied first.
/// Throws std::domain_error when the unit-eigenvalue eigenvector is not
/// unique (M D = I).
ChargePopulation NirEquilibrium(const NirRatePolynomial& ionization,
                                const NirRatePolynomial& recombination,
                                double nir_mw, const DestructivityMatrix& d,
                                double t_interact_ms);

/// Same fixed point from an arbitrary 2x2 column-stochastic cycle matrix.
ChargePopulation StationaryDistribution(
    const std::array<std::array<double, 2>, 2>& cycle);

}  // namespace nvreadout

#endif  // NVREADOUT_CHARGE_DYNAMICS_H_
