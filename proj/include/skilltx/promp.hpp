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

#ifndef SKILLTX_PROMP_HPP
#define SKILLTX_PROMP_HPP

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>
#include <utility>
#include <vector>

#include "skilltx/gaussian.hpp"

namespace skilltx {

/// Normalized Gaussian basis functions, linearly spaced over normalized
/// time [0, 1].
struct BasisSet {
  int num_basis = 0;
  int num_steps = 0;
  double width = 0.0;              // bandwidth in normalized time
  Eigen::VectorXd centers;         // strictly increasing, linspace(0, 1)

  /// Linearly spaced basis set. width <= 0 selects the default
  /// 1 / (num_basis - 1).
  static BasisSet linear(int num_basis, int num_steps, double width = -1.0);

  void validate() const;
};

/// A time-indexed path: num_steps x num_dims values, dt seconds per step.
struct Trajectory {
  Eigen::MatrixXd values;
  double dt = 0.004;

  int num_steps() const { return static_cast<int>(values.rows()); }
  int num_dims() const { return static_cast<int>(values.cols()); }
};

/// Basis weights, num_basis x num_dims.
struct WeightVector {
  Eigen::MatrixXd weights;

  int num_basis() const { return static_cast<int>(weights.rows()); }
  int num_dims() const { return static_cast<int>(weights.cols()); }
};

/// Gaussian distribution over stacked basis weights. The flat layout is
/// dimension-major: [weights of dim 0; weights of dim 1; ...], matching
/// Eigen's column-major reshape of a WeightVector.
struct ProMP {
  BasisSet basis;
  int num_dims = 0;
  Eigen::VectorXd mean;            // length num_basis * num_dims
  Eigen::MatrixXd covariance;      // SPD, same dimension
  double system_noise = 1e-6;      // scalar isotropic trajectory noise

  int dim() const { return basis.num_basis * num_dims; }
  void validate() const;
};

/// Flatten a weight matrix to the stacked layout used by ProMP and the
/// optimizer, and back.
Eigen::VectorXd flatten_weights(const WeightVector& w);
WeightVector unflatten_weights(const Eigen::VectorXd& flat, int num_basis,
                               int num_dims);

/// num_steps x num_basis feature matrix; each row is normalized to sum to 1.
Eigen::MatrixXd basis_matrix(const BasisSet& basis);

/// Per-dimension ridge regression of basis weights onto one demonstration.
WeightVector fit_weights(const Trajectory& demo, const BasisSet& basis,
                         double ridge);

/// Maximum-likelihood Gaussian over per-demo weights (divisor N), with
/// cov_reg * I added to the covariance diagonal.
ProMP fit_promp(const std::vector<Trajectory>& demos, const BasisSet& basis,
                double ridge, double cov_reg, double system_noise = 1e-6);

/// Reconstruct the trajectory Phi * w per dimension.
Trajectory render_trajectory(const BasisSet& basis, const WeightVector& weights,
                             double dt = 0.004);

/// One weight draw from N(mean, covariance), reshaped to a weight matrix.
WeightVector sample_weights(const ProMP& promp, Rng& rng);

/// Per-dimension marginal mean and variance of the trajectory at step t.
std::pair<Eigen::VectorXd, Eigen::VectorXd> step_marginal(const ProMP& promp,
                                                          int t);

nlohmann::json promp_to_json(const ProMP& promp);
ProMP promp_from_json(const nlohmann::json& j);

}  // namespace skilltx

#endif  // SKILLTX_PROMP_HPP
