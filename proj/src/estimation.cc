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

#include "nvreadout/estimation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/LU>

#include "nvreadout/least_squares.h"

namespace nvreadout {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void FillIntervals(FitResult* fit) {
  const Eigen::Index n = fit->values.size();
  fit->ci65.resize(n);
  fit->ci95.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double var = fit->covariance(i, i);
    const double sd = var > 0.0 ? std::sqrt(var) : (std::isinf(var) ? kInf : 0.0);
    fit->ci65(i) = kZ65 * sd;
    fit->ci95(i) = kZ95 * sd;
  }
}

double WeightedRSquared(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted,
                        const Eigen::VectorXd& w) {
  const double mean = (w.array() * y.array()).sum() / w.sum();
  const double ss_res = (w.array() * (y - fitted).array().square()).sum();
  const double ss_tot = (w.array() * (y.array() - mean).square()).sum();
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

FitResult FromLevenbergMarquardt(const LevenbergMarquardtResult& lm,
                                 std::vector<std::string> names,
                                 std::vector<std::string> units,
                                 std::size_t n_points, bool absolute_sigma) {
  FitResult fit;
  fit.names = std::move(names);
  fit.units = std::move(units);
  fit.values = lm.parameters;
  fit.covariance = CovarianceFromJacobian(lm.jacobian);
  fit.chi_squared = lm.cost;
  fit.dof = static_cast<int>(n_points) - static_cast<int>(lm.parameters.size());
  if (!absolute_sigma && fit.dof > 0) {
    fit.covariance *= lm.cost / fit.dof;
  }
  fit.iterations = lm.iterations;
  fit.converged = lm.converged;
  if (RankDeficient(lm.jacobian)) {
    fit.flags.push_back("rank_deficient");
    const std::vector<bool> unresolved = UnresolvedParameters(lm.jacobian);
    for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i) {
      if (!unresolved[static_cast<std::size_t>(i)]) continue;
      fit.covariance.row(i).setZero();
      fit.covariance.col(i).setZero();
      fit.covariance(i, i) = kInf;
    }
  }
  FillIntervals(&fit);
  return fit;
}

double BinomialError(double p, std::int64_t shots) {
  if (shots <= 0) {
    throw std::invalid_argument("point needs an error or a shot count");
  }
  const double n = static_cast<double>(shots);
  const double clamped = std::clamp(p, 0.5 / n, 1.0 - 0.5 / n);
  return std::sqrt(clamped * (1.0 - clamped) / n);
}

double LogPoisson(std::int64_t n, double eta) {
  if (eta == 0.0) return n == 0 ? 0.0 : -kInf;
  return n * std::log(eta) - eta - std::lgamma(static_cast<double>(n) + 1.0);
}

double LogSumExp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double MixtureLogLikelihood(const PhotonHistogram& h, double eta_zero,
                            double eta_minus, double w) {
  double ll = 0.0;
  for (std::size_t n = 0; n < h.occurrences.size(); ++n) {
    if (h.occurrences[n] == 0) continue;
    const auto k = static_cast<std::int64_t>(n);
    const double a = w > 0.0 ? std::log(w) + LogPoisson(k, eta_minus) : -kInf;
    const double b =
        w < 1.0 ? std::log1p(-w) + LogPoisson(k, eta_zero) : -kInf;
    ll += static_cast<double>(h.occurrences[n]) * LogSumExp(a, b);
  }
  return ll;
}

}  // namespace

std::size_t FitResult::index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw std::out_of_range("no fit parameter named '" + name + "'");
  }
  return static_cast<std::size_t>(it - names.begin());
}

double FitResult::sigma(const std::string& name) const {
  const std::size_t i = index(name);
  const double var = covariance(i, i);
  if (std::isinf(var)) return kInf;
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

bool FitResult::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

// ---------------------------------------------------------------------------

FitResult FitRatePolynomial(const std::vector<RatePoint>& data,
                            bool include_quadratic) {
  const Eigen::Index cols = include_quadratic ? 3 : 2;
  if (static_cast<Eigen::Index>(data.size()) < cols) {
    throw std::invalid_argument("too few points for the rate polynomial");
  }
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd design(n, cols);
  Eigen::VectorXd y(n);
  Eigen::VectorXd sigma(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = data[i].power_mw;
    design(i, 0) = r * r * r;
    if (include_quadratic) design(i, 1) = r * r;
    design(i, cols - 1) = 1.0;
    y(i) = data[i].rate_khz;
    sigma(i) = data[i].error_khz;
  }
  const LinearFit lin = WeightedLinearLeastSquares(design, y, sigma);

  FitResult fit;
  fit.names = {"a", "b", "c"};
  fit.units = {"kHz/mW^3", "kHz/mW^2", "kHz"};
  fit.values = Eigen::VectorXd::Zero(3);
  fit.covariance = Eigen::MatrixXd::Zero(3, 3);
  // Map solver columns onto (a, b, c).
  std::vector<int> slot = include_quadratic ? std::vector<int>{0, 1, 2}
                                            : std::vector<int>{0, 2};
  for (Eigen::Index i = 0; i < cols; ++i) {
    fit.values(slot[i]) = lin.coefficients(i);
    for (Eigen::Index j = 0; j < cols; ++j) {
      fit.covariance(slot[i], slot[j]) = lin.covariance(i, j);
    }
  }
  if (!include_quadratic) fit.flags.push_back("b_fixed_zero");
  fit.chi_squared = lin.chi_squared;
  fit.dof = static_cast<int>(n - cols);
  fit.converged = true;
  const Eigen::VectorXd w = sigma.array().inverse().square();
  fit.r_squared = WeightedRSquared(y, design * lin.coefficients, w);
  FillIntervals(&fit);
  return fit;
}

NirRatePolynomial ToNirRatePolynomial(const FitResult& fit) {
  return {fit.value("a"), fit.value("b"), fit.value("c")};
}

// ---------------------------------------------------------------------------

FitResult FitSteadyState(const std::vector<SteadyStatePoint>& data) {
  if (data.size() < 5) {
    throw std::invalid_argument(
        "steady-state fit is underdetermined with fewer than 5 points");
  }
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd r(n), y(n), sigma(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(data[i].error > 0.0)) {
      throw std::invalid_argument("steady-state points need errors > 0");
    }
    r(i) = data[i].nir_mw;
    y(i) = data[i].p_minus;
    sigma(i) = data[i].error;
  }
  // theta = (alpha, beta, gamma, delta)
  auto model = [&](const Eigen::VectorXd& t) {
    const Eigen::ArrayXd ra = r.array();
    return (t(2) * (1.0 + t(0) * ra) /
            (1.0 + t(3) * ra + t(1) * ra.square()))
        .matrix()
        .eval();
  };
  ResidualFunction residuals = [&](const Eigen::VectorXd& t) {
    return ((model(t) - y).array() / sigma.array()).matrix().eval();
  };
  const Eigen::Vector4d lower(0.0, 0.0, 0.0, 0.0);
  const Eigen::Vector4d upper(kInf, kInf, 1.0, kInf);

  const double r_max = std::max(r.maxCoeff(), 1e-12);
  Eigen::Index first = 0;
  r.minCoeff(&first);
  const double gamma0 = std::clamp(y(first), 0.01, 0.99);

  LevenbergMarquardtResult best;
  best.cost = kInf;
  for (double a : {0.3, 3.0, 30.0}) {
    for (double d : {0.3, 3.0, 30.0}) {
      for (double b : {0.01, 1.0, 10.0}) {
        const Eigen::Vector4d start(a / r_max, b / (r_max * r_max), gamma0,
                                    d / r_max);
        LevenbergMarquardtResult lm =
            LevenbergMarquardt(residuals, start, lower, upper);
        if (lm.cost < best.cost) best = std::move(lm);
      }
    }
  }
  FitResult fit = FromLevenbergMarquardt(best, {"alpha", "beta", "gamma", "delta"},
                                         {"1/mW", "1/mW^2", "1", "1/mW"},
                                         data.size(), /*absolute_sigma=*/true);
  fit.r_squared = WeightedRSquared(y, model(best.parameters),
                                   sigma.array().inverse().square().matrix());
  return fit;
}

SteadyStateParams ToSteadyStateParams(const FitResult& fit) {
  return {fit.value("alpha"), fit.value("beta"), fit.value("gamma"),
          fit.value("delta")};
}

// ---------------------------------------------------------------------------

FitResult FitPoissonMixture(const PhotonHistogram& histogram,
                            const MixtureFitOptions& options,
                            std::vector<double>* log_likelihood_history) {
  const std::uint64_t total = histogram.total();
  if (total == 0) throw std::invalid_argument("empty histogram");
  const auto& h = histogram.occurrences;
  const double n_total = static_cast<double>(total);

  double sum = 0.0;
  for (std::size_t n = 0; n < h.size(); ++n) sum += n * static_cast<double>(h[n]);
  const double mean = sum / n_total;

  // Split at the overall mean.
  double lo_count = 0, lo_sum = 0, hi_count = 0, hi_sum = 0;
  for (std::size_t n = 0; n < h.size(); ++n) {
    const double c = static_cast<double>(h[n]);
    if (static_cast<double>(n) <= mean) {
      lo_count += c;
      lo_sum += n * c;
    } else {
      hi_count += c;
      hi_sum += n * c;
    }
  }
  double eta_zero = lo_count > 0 ? lo_sum / lo_count : 0.0;
  double eta_minus = hi_count > 0 ? hi_sum / hi_count : mean;
  double w = hi_count / n_total;

  double ll = MixtureLogLikelihood(histogram, eta_zero, eta_minus, w);
  if (log_likelihood_history) log_likelihood_history->push_back(ll);
  int iter = 0;
  bool converged = hi_count == 0;
  while (!converged && iter < options.max_iterations) {
    double s_resp = 0, s_resp_n = 0, s_comp_n = 0;
    for (std::size_t n = 0; n < h.size(); ++n) {
      if (h[n] == 0) continue;
      const auto k = static_cast<std::int64_t>(n);
      const double a = w > 0.0 ? std::log(w) + LogPoisson(k, eta_minus) : -kInf;
      const double b = w < 1.0 ? std::log1p(-w) + LogPoisson(k, eta_zero) : -kInf;
      const double resp = std::exp(a - LogSumExp(a, b));
      const double c = static_cast<double>(h[n]);
      s_resp += c * resp;
      s_resp_n += c * resp * n;
      s_comp_n += c * (1.0 - resp) * n;
    }
    w = s_resp / n_total;
    eta_minus = s_resp > 0 ? s_resp_n / s_resp : eta_minus;
    eta_zero = (n_total - s_resp) > 0 ? s_comp_n / (n_total - s_resp) : eta_zero;
    const double next = MixtureLogLikelihood(histogram, eta_zero, eta_minus, w);
    ++iter;
    if (log_likelihood_history) log_likelihood_history->push_back(next);
    converged = std::abs(next - ll) <= options.relative_tolerance * std::abs(ll) ||
                next == ll;
    ll = next;
  }
  if (eta_minus < eta_zero) {
    std::swap(eta_minus, eta_zero);
    w = 1.0 - w;
  }

  FitResult fit;
  fit.names = {"eta_zero", "eta_minus", "weight_minus"};
  fit.units = {"photons", "photons", "1"};
  fit.iterations = iter;
  fit.converged = converged;
  fit.dof = static_cast<int>(h.size()) - 3;

  // Likelihood-ratio check against a single Poisson at the sample mean
  // (chi-square 95% quantile for 2 extra parameters).
  PhotonHistogram single_check = histogram;
  const double ll_single = MixtureLogLikelihood(single_check, 0.0, mean, 1.0);
  const bool degenerate = hi_count == 0 || 2.0 * (ll - ll_single) < 5.991;
  if (degenerate) {
    fit.values = Eigen::Vector3d(0.0, mean, 1.0);
    fit.covariance = Eigen::Matrix3d::Zero();
    fit.covariance(0, 0) = kInf;
    fit.covariance(1, 1) = mean / n_total;
    fit.flags.push_back("degenerate_eta_zero");
  } else {
    fit.values = Eigen::Vector3d(eta_zero, eta_minus, w);
    // Observed information from a central-difference Hessian.
    auto nll = [&](const Eigen::Vector3d& t) {
      return -MixtureLogLikelihood(histogram, t(0), t(1), t(2));
    };
    const Eigen::Vector3d theta = fit.values;
    Eigen::Vector3d step;
    for (int i = 0; i < 3; ++i) step(i) = std::max(1e-5, 1e-4 * std::abs(theta(i)));
    step(2) = std::min({step(2), 0.5 * theta(2), 0.5 * (1.0 - theta(2))});
    step(0) = std::min(step(0), theta(0) > 0 ? 0.5 * theta(0) : step(0));
    Eigen::Matrix3d hess;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        Eigen::Vector3d pp = theta, pm = theta, mp = theta, mm = theta;
        pp(i) += step(i); pp(j) += step(j);
        pm(i) += step(i); pm(j) -= step(j);
        mp(i) -= step(i); mp(j) += step(j);
        mm(i) -= step(i); mm(j) -= step(j);
        hess(i, j) = (nll(pp) - nll(pm) - nll(mp) + nll(mm)) /
                     (4.0 * step(i) * step(j));
      }
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(hess);
    if (lu.isInvertible() && step(0) > 0 && step(2) > 0) {
      fit.covariance = lu.inverse();
      fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
    } else {
      fit.covariance = Eigen::Matrix3d::Constant(kInf);
      fit.flags.push_back("singular_information");
    }
  }
  // Agreement of fitted and observed frequencies.
  const PoissonMixture m{fit.values(0), fit.values(1), fit.values(2)};
  Eigen::VectorXd observed(static_cast<Eigen::Index>(h.size()));
  Eigen::VectorXd expected(observed.size());
  for (std::size_t n = 0; n < h.size(); ++n) {
    observed(n) = static_cast<double>(h[n]) / n_total;
    expected(n) = MixturePmf(m, static_cast<std::int64_t>(n));
  }
  fit.r_squared =
      WeightedRSquared(observed, expected, Eigen::VectorXd::Ones(observed.size()));
  fit.chi_squared = -2.0 * ll;
  FillIntervals(&fit);
  return fit;
}

PoissonMixture ToPoissonMixture(const FitResult& fit) {
  return {fit.value("eta_zero"), fit.value("eta_minus"),
          fit.value("weight_minus")};
}

// ---------------------------------------------------------------------------

FitResult FitExponential(const std::vector<DecayPoint>& data) {
  if (data.size() < 4) {
    throw std::invalid_argument("exponential fit needs at least 4 points");
  }
  std::vector<DecayPoint> sorted = data;
  std::sort(sorted.begin(), sorted.end(),
            [](const DecayPoint& a, const DecayPoint& b) {
              return a.delay_ns < b.delay_ns;
            });
  const auto n = static_cast<Eigen::Index>(sorted.size());
  const bool absolute_sigma =
      std::all_of(sorted.begin(), sorted.end(),
                  [](const DecayPoint& p) { return p.error > 0.0; });
  Eigen::VectorXd t(n), y(n), sigma(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i) = sorted[i].delay_ns;
    y(i) = sorted[i].value;
    sigma(i) = absolute_sigma ? sorted[i].error : 1.0;
  }
  const double span = std::max(t(n - 1) - t(0), 1e-12);
  auto model = [&](const Eigen::VectorXd& p) {
    return (p(0) * (-(t.array() - t(0)) / p(1)).exp() + p(2)).matrix().eval();
  };
  ResidualFunction residuals = [&](const Eigen::VectorXd& p) {
    return ((model(p) - y).array() / sigma.array()).matrix().eval();
  };
  const Eigen::Vector3d lower(-kInf, 1e-6 * span, -kInf);
  const Eigen::Vector3d upper(kInf, 1e3 * span, kInf);

  const Eigen::Index tail = std::max<Eigen::Index>(1, n / 8);
  const double offset0 = y.tail(tail).mean();
  const double amp0 = y(0) - offset0;

  LevenbergMarquardtResult best;
  best.cost = kInf;
  for (double frac : {0.03, 0.1, 0.3, 1.0}) {
    LevenbergMarquardtResult lm = LevenbergMarquardt(
        residuals, Eigen::Vector3d(amp0, frac * span, offset0), lower, upper);
    if (lm.cost < best.cost) best = std::move(lm);
  }
  // Amplitude is quoted at the earliest delay, so shift back to delay = 0.
  FitResult fit =
      FromLevenbergMarquardt(best, {"amplitude", "lifetime", "offset"},
                             {"1", "ns", "1"}, data.size(), absolute_sigma);
  if (t(0) != 0.0) {
    const double scale = std::exp(t(0) / fit.values(1));
    const double a = fit.values(0);
    const double tau = fit.values(1);
    fit.values(0) = a * scale;
    // Jacobian of (a e^{t0/tau}, tau, c) with respect to (a, tau, c).
    Eigen::Matrix3d g = Eigen::Matrix3d::Identity();
    g(0, 0) = scale;
    g(0, 1) = -a * scale * t(0) / (tau * tau);
    fit.covariance = g * fit.covariance * g.transpose();
    FillIntervals(&fit);
  }
  const double amp_sd = fit.sigma("amplitude");
  if (fit.has_flag("rank_deficient") || std::abs(best.parameters(0)) <= 2.0 * amp_sd ||
      best.parameters(0) == 0.0) {
    fit.flags.push_back("lifetime_unidentifiable");
  }
  fit.r_squared = WeightedRSquared(y, model(best.parameters),
                                   sigma.array().inverse().square().matrix());
  return fit;
}

// ---------------------------------------------------------------------------

namespace {

SccParams SccFromVector(const Eigen::VectorXd& v, double p_ion) {
  SccParams p;
  p.p_ion = p_ion;
  p.charge_init_nv0 = v(0);
  p.k35 = v(1);
  p.k45 = v(2);
  p.p_sing = v(3);
  p.k51_over_k52 = v(4);
  p.spin_init = v(5);
  return p;
}

void SccCurve(const SccParams& params, SpinState spin, int max_cycles,
              std::vector<double>* out) {
  const Matrix6 cycle = BuildMatrices(params).Cycle();
  Vector6 p = InitialState(params, spin).populations();
  out->assign(static_cast<std::size_t>(max_cycles) + 1, 0.0);
  for (int k = 0; k <= max_cycles; ++k) {
    (*out)[k] = p(0) + p(1);
    p = cycle * p;
  }
}

}  // namespace

FitResult FitSccJoint(const std::vector<SccPoint>& ms0,
                      const std::vector<SccPoint>& ms1,
                      const SccFitOptions& options) {
  const std::size_t total = ms0.size() + ms1.size();
  if (total < 7) {
    throw std::invalid_argument("SCC fit needs at least 7 points");
  }
  int max_cycles = 0;
  std::vector<double> sigma0, sigma1;
  for (const auto* set : {&ms0, &ms1}) {
    auto& sig = set == &ms0 ? sigma0 : sigma1;
    for (const SccPoint& p : *set) {
      if (p.cycles < 0) throw std::invalid_argument("negative cycle count");
      max_cycles = std::max(max_cycles, p.cycles);
      sig.push_back(p.error > 0.0 ? p.error : BinomialError(p.nv_minus, p.shots));
    }
  }
  const double p_ion = options.p_ion;
  std::vector<double> curve0, curve1;
  ResidualFunction residuals = [&](const Eigen::VectorXd& v) {
    const SccParams params = SccFromVector(v, p_ion);
    Eigen::VectorXd r(static_cast<Eigen::Index>(total));
    Eigen::Index k = 0;
    if (!ms0.empty()) {
      SccCurve(params, SpinState::kZero, max_cycles, &curve0);
      for (std::size_t i = 0; i < ms0.size(); ++i) {
        r(k++) = (curve0[ms0[i].cycles] - ms0[i].nv_minus) / sigma0[i];
      }
    }
    if (!ms1.empty()) {
      SccCurve(params, SpinState::kPlusMinusOne, max_cycles, &curve1);
      for (std::size_t i = 0; i < ms1.size(); ++i) {
        r(k++) = (curve1[ms1[i].cycles] - ms1[i].nv_minus) / sigma1[i];
      }
    }
    return r;
  };
  Eigen::VectorXd lower = Eigen::VectorXd::Zero(6);
  Eigen::VectorXd upper = Eigen::VectorXd::Ones(6);
  upper(4) = 100.0;

  const SccParams& s = options.initial;
  Eigen::VectorXd start(6);
  start << s.charge_init_nv0, s.k35, s.k45, s.p_sing, s.k51_over_k52,
      s.spin_init;

  LevenbergMarquardtResult best;
  best.cost = kInf;
  for (double ratio_scale : {1.0, 0.5, 2.0}) {
    Eigen::VectorXd trial = start;
    trial(4) *= ratio_scale;
    LevenbergMarquardtResult lm = LevenbergMarquardt(residuals, trial, lower, upper);
    if (lm.cost < best.cost) best = std::move(lm);
  }
  FitResult fit = FromLevenbergMarquardt(
      best,
      {"charge_init_nv0", "k35", "k45", "p_sing", "k51_over_k52", "spin_init"},
      {"1", "1", "1", "1", "1", "1"}, total, /*absolute_sigma=*/true);

  Eigen::VectorXd y(static_cast<Eigen::Index>(total));
  Eigen::VectorXd w(y.size());
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < ms0.size(); ++i, ++k) {
    y(k) = ms0[i].nv_minus;
    w(k) = 1.0 / (sigma0[i] * sigma0[i]);
  }
  for (std::size_t i = 0; i < ms1.size(); ++i, ++k) {
    y(k) = ms1[i].nv_minus;
    w(k) = 1.0 / (sigma1[i] * sigma1[i]);
  }
  const Eigen::VectorXd r = residuals(best.parameters);
  const Eigen::VectorXd sig = w.array().rsqrt().matrix();
  const Eigen::VectorXd fitted = y + (r.array() * sig.array()).matrix();
  fit.r_squared = WeightedRSquared(y, fitted, w);
  return fit;
}

SccParams ToSccParams(const FitResult& fit, double p_ion) {
  SccParams p;
  p.p_ion = p_ion;
  p.charge_init_nv0 = fit.value("charge_init_nv0");
  p.k35 = fit.value("k35");
  p.k45 = fit.value("k45");
  p.p_sing = fit.value("p_sing");
  p.k51_over_k52 = fit.value("k51_over_k52");
  p.spin_init = fit.value("spin_init");
  return p;
}

// ---------------------------------------------------------------------------

RateEstimate RateFromTransitions(std::int64_t transitions, std::int64_t trials,
                                 double pulse_duration_ms, bool log_corrected) {
  if (trials <= 0) throw std::invalid_argument("trials must be > 0");
  if (transitions < 0 || transitions > trials) {
    throw std::invalid_argument("transitions must lie in [0, trials]");
  }
  if (!(pulse_duration_ms > 0.0)) {
    throw std::invalid_argument("pulse duration must be > 0");
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(transitions) / n;
  RateEstimate out;
  if (log_corrected) {
    if (transitions == trials) {
      throw std::domain_error("log-corrected rate diverges when every trial flips");
    }
    out.rate_khz = -std::log1p(-p) / pulse_duration_ms;
    out.error_khz = std::sqrt(p / (n * (1.0 - p))) / pulse_duration_ms;
  } else {
    out.rate_khz = p / pulse_duration_ms;
    out.error_khz = std::sqrt(p * (1.0 - p) / n) / pulse_duration_ms;
  }
  if (transitions == 0) {
    // Exact one-sided 95% bound for zero successes: 1 - 0.05^(1/n).
    const double p_upper = -std::expm1(std::log(0.05) / n);
    out.upper_bound_khz = (log_corrected ? -std::log1p(-p_upper) : p_upper) /
                          pulse_duration_ms;
  }
  return out;
}

}  // namespace nvreadout
