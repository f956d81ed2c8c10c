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

#ifndef NVREADOUT_LEAST_SQUARES_H_
#define NVREADOUT_LEAST_SQUARES_H_

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace nvreadout {

/// Maps parameters to the vector of *weighted* residuals (r_i / sigma_i).
using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LevenbergMarquardtOptions {
  double initial_lambda = 1e-3;
  double lambda_factor = 10.0;
  double relative_tolerance = 1e-10;
  int max_iterations = 500;
};

struct LevenbergMarquardtResult {
  Eigen::VectorXd parameters;
  Eigen::MatrixXd jacobian;  // of the weighted residuals at `parameters`
  double cost = 0.0;         // sum of squared weighted residuals
  int iterations = 0;
  bool converged = false;
  /// Cost after the initial point and after every accepted step.
  std::vector<double> cost_history;
};

/// Central-difference Jacobian with step h = max(1e-6, 1e-6 |theta_j|);
/// one-sided next to a bound.
Eigen::MatrixXd FiniteDifferenceJacobian(const ResidualFunction& residuals,
                                         const Eigen::VectorXd& theta,
                                         const Eigen::VectorXd& lower,
                                         const Eigen::VectorXd& upper);

/// Box-constrained Levenberg-Marquardt.  Trial points are projected onto
/// [lower, upper]; damping uses Marquardt's diagonal scaling.
LevenbergMarquardtResult LevenbergMarquardt(
    const ResidualFunction& residuals, const Eigen::VectorXd& initial,
    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
    const LevenbergMarquardtOptions& options = {});

/// Parameter covariance (J^T J)^+ from a weighted-residual Jacobian.  The
/// pseudo-inverse leaves unidentifiable directions at zero rather than
/// blowing up; callers detect them through `RankDeficient`.
Eigen::MatrixXd CovarianceFromJacobian(const Eigen::MatrixXd& jacobian);
bool RankDeficient(const Eigen::MatrixXd& jacobian);

/// Marks parameters with a non-negligible component along a null direction
/// of J^T J.  Their variance is unbounded.
std::vector<bool> UnresolvedParameters(const Eigen::MatrixXd& jacobian);

struct LinearFit {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;  // (X^T W X)^-1
  double chi_squared = 0.0;
};

/// Weighted linear least squares by the normal equations; sigma are the
/// per-point standard errors.
LinearFit WeightedLinearLeastSquares(const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& sigma);

}  // namespace nvreadout

#endif  // NVREADOUT_LEAST_SQUARES_H_
