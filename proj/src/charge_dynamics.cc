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

#include "nvreadout/charge_dynamics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nvreadout {
namespace {

constexpr double kSumTolerance = 1e-12;

void RequireNonNegative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::domain_error(std::string(name) + " must be finite and >= 0");
  }
}

double Clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

ChargePopulation::ChargePopulation(double p_minus, double p_zero)
    : p_minus_(p_minus), p_zero_(p_zero) {
  if (!(p_minus >= 0.0 && p_minus <= 1.0 && p_zero >= 0.0 && p_zero <= 1.0)) {
    throw std::invalid_argument("charge population entries must lie in [0,1]");
  }
  if (std::abs(p_minus + p_zero - 1.0) > kSumTolerance) {
    throw std::invalid_argument("charge population must sum to 1");
  }
}

ChargePopulation ChargePopulation::FromMinus(double p_minus) {
  return ChargePopulation(p_minus, 1.0 - p_minus);
}

void MultiphotonRateModel::Validate() const {
  for (double c : {c20, c11, c12, d20, d11}) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("rate coefficients must be finite and >= 0");
    }
  }
}

void SteadyStateParams::Validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in [0,1]");
  }
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(delta >= 0.0)) {
    throw std::invalid_argument("alpha, beta, delta must be >= 0");
  }
}

void NirRatePolynomial::Validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw std::invalid_argument("NIR polynomial coefficients must be finite");
  }
  // Cubic without a linear term: the minimum over [0, Rmax] is at an end
  // point or at the stationary point R = -2b/(3a).
  auto eval = [&](double r) { return (a * r + b) * r * r + c; };
  double lowest = std::min(eval(0.0), eval(kValidMaxMw));
  if (a != 0.0) {
    const double stationary = -2.0 * b / (3.0 * a);
    if (stationary > 0.0 && stationary < kValidMaxMw) {
      lowest = std::min(lowest, eval(stationary));
    }
  }
  if (lowest < 0.0) {
    throw std::invalid_argument(
        "NIR rate polynomial is negative inside [0, 100] mW");
  }
}

DestructivityMatrix::DestructivityMatrix(
    const std::array<std::array<double, 2>, 2>& m)
    : m_(m) {
  for (int col = 0; col < 2; ++col) {
    for (int row = 0; row < 2; ++row) {
      if (!(m[row][col] >= 0.0 && m[row][col] <= 1.0)) {
        throw std::invalid_argument(
            "destructivity matrix entries must lie in [0,1]");
      }
    }
    if (std::abs(m[0][col] + m[1][col] - 1.0) > kSumTolerance) {
      throw std::invalid_argument(
          "destructivity matrix columns must sum to 1");
    }
  }
}

DestructivityMatrix DestructivityMatrix::Identity() {
  return DestructivityMatrix({{{1.0, 0.0}, {0.0, 1.0}}});
}

double IonizationRate(const MultiphotonRateModel& model, double green_uw,
                      double nir_mw) {
  RequireNonNegative(green_uw, "green power");
  RequireNonNegative(nir_mw, "NIR power");
  const double g = green_uw;
  const double r = nir_mw;
  return model.c20 * g * g + model.c11 * g * r + model.c12 * g * r * r;
}

double RecombinationRate(const MultiphotonRateModel& model, double green_uw,
                         double nir_mw) {
  RequireNonNegative(green_uw, "green power");
  RequireNonNegative(nir_mw, "NIR power");
  const double g = green_uw;
  return model.d20 * g * g + model.d11 * g * nir_mw;
}

double NirOnlyRate(const NirRatePolynomial& poly, double nir_mw) {
  RequireNonNegative(nir_mw, "NIR power");
  return (poly.a * nir_mw + poly.b) * nir_mw * nir_mw + poly.c;
}

ChargePopulation Evolve(const ChargePopulation& initial, double gamma_ion_khz,
                        double gamma_rec_khz, double t_ms) {
  RequireNonNegative(gamma_ion_khz, "ionization rate");
  RequireNonNegative(gamma_rec_khz, "recombination rate");
  RequireNonNegative(t_ms, "evolution time");
  const double total = gamma_ion_khz + gamma_rec_khz;
  if (total == 0.0 || t_ms == 0.0) return initial;
  const double p_ss = gamma_rec_khz / total;
  // p(t) = p0 + (p_ss - p0)(1 - e^{-kt}); expm1 keeps small kt exact.
  const double relaxed = -std::expm1(-total * t_ms);
  const double p = initial.p_minus() + (p_ss - initial.p_minus()) * relaxed;
  return ChargePopulation::FromMinus(Clamp01(p));
}

std::array<std::array<double, 2>, 2> EvolutionMatrix(double gamma_ion_khz,
                                                     double gamma_rec_khz,
                                                     double t_ms) {
  const ChargePopulation from_minus =
      Evolve(ChargePopulation::Negative(), gamma_ion_khz, gamma_rec_khz, t_ms);
  const ChargePopulation from_zero =
      Evolve(ChargePopulation::Neutral(), gamma_ion_khz, gamma_rec_khz, t_ms);
  return {{{from_minus.p_minus(), from_zero.p_minus()},
           {from_minus.p_zero(), from_zero.p_zero()}}};
}

ChargePopulation SteadyState(const MultiphotonRateModel& model, double green_uw,
                             double nir_mw) {
  const double ion = IonizationRate(model, green_uw, nir_mw);
  const double rec = RecombinationRate(model, green_uw, nir_mw);
  if (ion + rec == 0.0) {
    throw std::domain_error("steady state undefined: both rates are zero");
  }
  return ChargePopulation::FromMinus(Clamp01(rec / (ion + rec)));
}

double SteadyStateParametric(const SteadyStateParams& params, double nir_mw) {
  RequireNonNegative(nir_mw, "NIR power");
  const double r = nir_mw;
  const double denominator = 1.0 + params.delta * r + params.beta * r * r;
  if (!(denominator > 0.0)) {
    throw std::domain_error("steady-state denominator must be positive");
  }
  return params.gamma * (1.0 + params.alpha * r) / denominator;
}

SteadyStateParams DeriveParams(const MultiphotonRateModel& model,
                               double green_uw) {
  model.Validate();
  if (!(green_uw > 0.0)) {
    throw std::domain_error("derive_params requires green power > 0");
  }
  if (model.d20 == 0.0 && model.d11 > 0.0) {
    throw std::domain_error("alpha diverges: d20 = 0 with d11 > 0");
  }
  const double visible_sum = model.c20 + model.d20;
  if (visible_sum == 0.0) {
    throw std::domain_error("gamma undefined: c20 + d20 = 0");
  }
  SteadyStateParams p;
  p.alpha = model.d20 == 0.0 ? 0.0 : model.d11 / (model.d20 * green_uw);
  p.beta = model.c12 / (visible_sum * green_uw);
  p.gamma = model.d20 / visible_sum;
  p.delta = (model.c11 + model.d11) / (visible_sum * green_uw);
  return p;
}

RatioDiagnostics ComputeRatioDiagnostics(const SteadyStateParams& params) {
  params.Validate();
  if (params.delta == 0.0 || params.alpha == 0.0 || params.gamma == 0.0) {
    throw std::domain_error(
        "ratio diagnostics need alpha, delta and gamma all > 0");
  }
  RatioDiagnostics out;
  // alpha/delta * gamma = D11/(D11 + C11)
  const double share = params.alpha / params.delta * params.gamma;
  if (share >= 1.0) {
    out.d11_over_c11 = std::numeric_limits<double>::infinity();
    out.d11_over_c11_unbounded = true;
  } else {
    out.d11_over_c11 = share / (1.0 - share);
  }
  out.c12_over_d11 = params.beta / params.alpha / params.gamma;
  out.d20_over_c20 = params.gamma >= 1.0
                         ? std::numeric_limits<double>::infinity()
                         : params.gamma / (1.0 - params.gamma);
  return out;
}

ChargePopulation StationaryDistribution(
    const std::array<std::array<double, 2>, 2>& cycle) {
  // Null space of (A - I) for A = [[a, b], [1-a, 1-b]]: p = b / (1 - a + b).
  const double a = cycle[0][0];
  const double b = cycle[0][1];
  const double denominator = (1.0 - a) + b;
  if (denominator <= 1e-15) {
    throw std::domain_error(
        "unit-eigenvalue eigenvector is not unique (cycle matrix is identity)");
  }
  return ChargePopulation::FromMinus(Clamp01(b / denominator));
}

ChargePopulation NirEquilibrium(const NirRatePolynomial& ionization,
                                const NirRatePolynomial& recombination,
                                double nir_mw, const DestructivityMatrix& d,
                                double t_interact_ms) {
  if (!(t_interact_ms > 0.0)) {
    throw std::domain_error("interaction time must be > 0");
  }
  const auto m = EvolutionMatrix(NirOnlyRate(ionization, nir_mw),
                                 NirOnlyRate(recombination, nir_mw),
                                 t_interact_ms);
  std::array<std::array<double, 2>, 2> cycle{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      cycle[i][j] = m[i][0] * d(0, j) + m[i][1] * d(1, j);
    }
  }
  return StationaryDistribution(cycle);
}

}  // namespace nvreadout
