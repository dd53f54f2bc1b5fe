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

#ifndef SKILLTX_REPS_HPP
#define SKILLTX_REPS_HPP

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "skilltx/gaussian.hpp"

namespace skilltx {

/// Gaussian search distribution over policy parameters.
struct SearchDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  int dim() const { return static_cast<int>(mean.size()); }
  void validate() const;
};

struct RepsConfig {
  double epsilon = 0.5;            // KL bound in nats
  int samples_per_iteration = 30;
  int num_iterations = 40;
  double eta_min = 1e-8;
  double cov_floor = 1e-8;
};

struct SampleBatch {
  std::vector<Eigen::VectorXd> parameters;
  std::vector<double> rewards;     // accumulated episode rewards, higher is better
};

struct IterationStats {
  double mean_reward = 0.0;
  double max_reward = 0.0;
  double eta = 0.0;
  double kl_to_previous = 0.0;     // closed-form Gaussian KL(new || previous)
  double effective_sample_size = 0.0;
};

/// Reward evaluator for one parameter vector. Must be side-effect-free per
/// sample so batches may be evaluated concurrently by the caller.
using RewardFunction = std::function<double(const Eigen::VectorXd&)>;

/// g(eta) = eta * epsilon + eta * log( (1/N) sum_i exp(R_i / eta) ),
/// evaluated in log-sum-exp form.
double dual_value(double eta, const std::vector<double>& rewards, double epsilon);

/// Minimizer of the dual over eta >= eta_min: coarse log grid, then
/// golden-section refinement. Numerically constant rewards clamp to eta_min.
double solve_eta(const std::vector<double>& rewards, double epsilon,
                 double eta_min);

/// Exponential re-weighting d_i = exp((R_i - max R) / eta) followed by the
/// weighted maximum-likelihood Gaussian fit, with cov_floor * I added.
SearchDistribution weighted_update(const SampleBatch& batch, double eta,
                                   const SearchDistribution& previous,
                                   double cov_floor);

/// Exponential-weight effective sample size (sum d)^2 / sum d^2.
double effective_sample_size(const std::vector<double>& rewards, double eta);

/// Draw n parameter vectors from the search distribution.
SampleBatch sample_batch(const SearchDistribution& dist, int n, Rng& rng);

/// One REPS iteration: sample, evaluate, solve the dual, re-fit.
std::pair<SearchDistribution, IterationStats> reps_step(
    const SearchDistribution& current, const RewardFunction& evaluate,
    const RepsConfig& config, Rng& rng);

/// Full optimization loop; returns the final distribution and the curve.
std::pair<SearchDistribution, std::vector<IterationStats>> optimize(
    const SearchDistribution& init, const RewardFunction& evaluate,
    const RepsConfig& config, Rng& rng);

}  // namespace skilltx

#endif  // SKILLTX_REPS_HPP
