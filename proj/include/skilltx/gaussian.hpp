/*
 Copyright 2026 The skilltx Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef SKILLTX_GAUSSIAN_HPP
#define SKILLTX_GAUSSIAN_HPP

#include <Eigen/Dense>
#include <random>

namespace skilltx {

using Rng = std::mt19937_64;

/// One draw from the standard normal. Deterministic given the engine state.
double standard_normal(Rng& rng);

/// Vector of i.i.d. standard normal draws.
Eigen::VectorXd standard_normal_vector(int dim, Rng& rng);

/// Draw from N(mean, covariance) via the lower Cholesky factor.
/// Throws std::runtime_error if the covariance cannot be factorized.
Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& covariance, Rng& rng);

/// Closed-form KL(N(mean0, cov0) || N(mean1, cov1)) in nats.
double gaussian_kl(const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0,
                   const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& symmetric);

}  // namespace skilltx

#endif  // SKILLTX_GAUSSIAN_HPP
