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

#include "nvreadout/least_squares.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace nvreadout {
namespace {

Eigen::VectorXd Project(const Eigen::VectorXd& theta,
                        const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper) {
  return theta.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace

Eigen::MatrixXd FiniteDifferenceJacobian(const ResidualFunction& residuals,
                                         const Eigen::VectorXd& theta,
                                         const Eigen::VectorXd& lower,
                                         const Eigen::VectorXd& upper) {
  const Eigen::VectorXd r0 = residuals(theta);
  Eigen::MatrixXd jac(r0.size(), theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double h = std::max(1e-6, 1e-6 * std::abs(theta(j)));
    Eigen::VectorXd plus = theta;
    Eigen::VectorXd minus = theta;
    plus(j) = std::min(theta(j) + h, upper(j));
    minus(j) = std::max(theta(j) - h, lower(j));
    const double span = plus(j) - minus(j);
    if (span <= 0.0) {
      jac.col(j).setZero();
      continue;
    }
    const Eigen::VectorXd r_plus = plus(j) == theta(j) ? r0 : residuals(plus);
    const Eigen::VectorXd r_minus =
        minus(j) == theta(j) ? r0 : residuals(minus);
    jac.col(j) = (r_plus - r_minus) / span;
  }
  return jac;
}

LevenbergMarquardtResult LevenbergMarquardt(
    const ResidualFunction& residuals, const Eigen::VectorXd& initial,
    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
    const LevenbergMarquardtOptions& options) {
  if (initial.size() != lower.size() || initial.size() != upper.size()) {
    throw std::invalid_argument("parameter and bound sizes differ");
  }
  LevenbergMarquardtResult out;
  Eigen::VectorXd theta = Project(initial, lower, upper);
  Eigen::VectorXd r = residuals(theta);
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) {
    throw std::domain_error("objective is not finite at the initial point");
  }
  out.cost_history.push_back(cost);
  double lambda = options.initial_lambda;

  Eigen::MatrixXd jac = FiniteDifferenceJacobian(residuals, theta, lower, upper);
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * r;
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index k = 0; k < damped.rows(); ++k) {
        damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      }
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
      const Eigen::VectorXd candidate = Project(theta + step, lower, upper);
      const Eigen::VectorXd r_candidate = residuals(candidate);
      const double candidate_cost = r_candidate.squaredNorm();
      if (std::isfinite(candidate_cost) && candidate_cost < cost) {
        const double relative_change = (cost - candidate_cost) / std::max(cost, 1e-300);
        theta = candidate;
        r = r_candidate;
        cost = candidate_cost;
        out.cost_history.push_back(cost);
        lambda = std::max(lambda / options.lambda_factor, 1e-12);
        accepted = true;
        if (relative_change < options.relative_tolerance) out.converged = true;
        break;
      }
      lambda *= options.lambda_factor;
    }
    if (!accepted) {
      // No downhill step at any damping: stationary within round-off.
      out.converged = true;
      break;
    }
    jac = FiniteDifferenceJacobian(residuals, theta, lower, upper);
    if (out.converged || cost == 0.0) {
      out.converged = true;
      ++iter;
      break;
    }
  }
  out.parameters = theta;
  out.jacobian = jac;
  out.cost = cost;
  out.iterations = iter;
  return out;
}

Eigen::MatrixXd CovarianceFromJacobian(const Eigen::MatrixXd& jacobian) {
  const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jtj);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff) inv(i) = 1.0 / ev(i);
  }
  Eigen::MatrixXd cov =
      eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (cov + cov.transpose());
}

bool RankDeficient(const Eigen::MatrixXd& jacobian) {
  const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jtj);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  return largest == 0.0 || ev.minCoeff() <= 1e-12 * largest;
}

std::vector<bool> UnresolvedParameters(const Eigen::MatrixXd& jacobian) {
  const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jtj);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  std::vector<bool> unresolved(static_cast<std::size_t>(ev.size()), false);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (largest != 0.0 && ev(k) > 1e-12 * largest) continue;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const double component = eig.eigenvectors()(i, k);
      if (component * component > 1e-12) unresolved[static_cast<std::size_t>(i)] = true;
    }
  }
  return unresolved;
}

LinearFit WeightedLinearLeastSquares(const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& sigma) {
  if (design.rows() != y.size() || y.size() != sigma.size()) {
    throw std::invalid_argument("design, data and error sizes differ");
  }
  if (design.rows() < design.cols()) {
    throw std::invalid_argument("underdetermined linear fit");
  }
  if ((sigma.array() <= 0.0).any()) {
    throw std::invalid_argument("standard errors must be > 0");
  }
  const Eigen::VectorXd w = sigma.array().inverse().square();
  const Eigen::MatrixXd xtwx = design.transpose() * w.asDiagonal() * design;
  const Eigen::VectorXd xtwy = design.transpose() * w.asDiagonal() * y;
  Eigen::LLT<Eigen::MatrixXd> llt(xtwx);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("normal equations are singular");
  }
  LinearFit fit;
  fit.coefficients = llt.solve(xtwy);
  fit.covariance = llt.solve(
      Eigen::MatrixXd::Identity(design.cols(), design.cols()));
  const Eigen::VectorXd residual =
      ((y - design * fit.coefficients).array() / sigma.array()).matrix();
  fit.chi_squared = residual.squaredNorm();
  return fit;
}

}  // namespace nvreadout
