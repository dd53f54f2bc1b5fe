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

#include "skilltx/reps.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace skilltx {

namespace {

constexpr double kConstantRewardSpread = 1e-12;

// Dual evaluated on max-centered rewards; shifting all rewards by a constant
// leaves this value unchanged. dual_value = this + max(rewards).
double centered_dual(double eta, const std::vector<double>& centered,
                     double epsilon) {
  double sum_exp = 0.0;
  for (const double r : centered) {
    sum_exp += std::exp(r / eta);
  }
  return eta * epsilon + eta * std::log(sum_exp / static_cast<double>(centered.size()));
}

std::vector<double> center_at_max(const std::vector<double>& rewards) {
  const double max_r = *std::max_element(rewards.begin(), rewards.end());
  std::vector<double> centered(rewards.size());
  for (size_t i = 0; i < rewards.size(); ++i) centered[i] = rewards[i] - max_r;
  return centered;
}

// Normalized exponential weights exp((R_i - max R) / eta) / sum.
Eigen::VectorXd exponential_weights(const std::vector<double>& rewards,
                                    double eta) {
  const std::vector<double> centered = center_at_max(rewards);
  Eigen::VectorXd w(static_cast<Eigen::Index>(centered.size()));
  for (size_t i = 0; i < centered.size(); ++i) {
    w(static_cast<Eigen::Index>(i)) = std::exp(centered[i] / eta);
  }
  const double total = w.sum();
  assert(total >= 1.0);  // the best sample always contributes exp(0) = 1
  return w / total;
}

}  // namespace

void SearchDistribution::validate() const {
  if (mean.size() < 1)
    throw std::invalid_argument("SearchDistribution: empty mean");
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
    throw std::invalid_argument("SearchDistribution: covariance shape mismatch");
  if (!mean.allFinite() || !covariance.allFinite())
    throw std::invalid_argument("SearchDistribution: non-finite entries");
}

double dual_value(double eta, const std::vector<double>& rewards,
                  double epsilon) {
  if (!(eta > 0.0)) throw std::invalid_argument("dual_value: eta must be > 0");
  if (rewards.empty()) throw std::invalid_argument("dual_value: empty rewards");
  const double max_r = *std::max_element(rewards.begin(), rewards.end());
  return centered_dual(eta, center_at_max(rewards), epsilon) + max_r;
}

double solve_eta(const std::vector<double>& rewards, double epsilon,
                 double eta_min) {
  if (rewards.size() < 2)
    throw std::invalid_argument("solve_eta: need at least 2 rewards");
  if (!(epsilon > 0.0)) throw std::invalid_argument("solve_eta: epsilon must be > 0");
  const auto [min_it, max_it] = std::minmax_element(rewards.begin(), rewards.end());
  const double spread = *max_it - *min_it;
  if (spread < kConstantRewardSpread) {
    return eta_min;
  }

  // The dual is convex in eta with derivative epsilon > 0 as eta -> inf; the
  // minimizer lies below spread / epsilon (where the KL of the weights has
  // already dropped below epsilon).
  const std::vector<double> centered = center_at_max(rewards);
  const auto dual = [&](double log_eta) {
    return centered_dual(std::exp(log_eta), centered, epsilon);
  };

  const double lo_bound = std::log(eta_min);
  const double hi_bound = std::log(std::max(1.0, 10.0 * spread / epsilon));

  // Coarse grid to bracket the minimum.
  constexpr int kGridPoints = 200;
  int best = 0;
  double best_value = dual(lo_bound);
  const double step = (hi_bound - lo_bound) / (kGridPoints - 1);
  for (int i = 1; i < kGridPoints; ++i) {
    const double value = dual(lo_bound + i * step);
    if (value < best_value) {
      best_value = value;
      best = i;
    }
  }
  double lo = lo_bound + std::max(0, best - 1) * step;
  double hi = lo_bound + std::min(kGridPoints - 1, best + 1) * step;

  // Golden-section refinement on log eta.
  constexpr double kInvPhi = 0.6180339887498949;
  constexpr double kLogTol = 1e-7;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = dual(x1);
  double f2 = dual(x2);
  while (hi - lo > kLogTol) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = dual(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = dual(x2);
    }
  }
  return std::max(eta_min, std::exp(0.5 * (lo + hi)));
}

SearchDistribution weighted_update(const SampleBatch& batch, double eta,
                                   const SearchDistribution& previous,
                                   double cov_floor) {
  if (batch.parameters.empty())
    throw std::invalid_argument("weighted_update: empty batch");
  if (batch.parameters.size() != batch.rewards.size())
    throw std::invalid_argument("weighted_update: parameter/reward length mismatch");
  if (!(eta > 0.0)) throw std::invalid_argument("weighted_update: eta must be > 0");
  const Eigen::Index d = previous.mean.size();
  for (const auto& p : batch.parameters) {
    if (p.size() != d)
      throw std::invalid_argument("weighted_update: sample dimension mismatch");
  }

  const Eigen::VectorXd w = exponential_weights(batch.rewards, eta);

  SearchDistribution next;
  next.mean = Eigen::VectorXd::Zero(d);
  for (size_t i = 0; i < batch.parameters.size(); ++i) {
    next.mean += w(static_cast<Eigen::Index>(i)) * batch.parameters[i];
  }
  next.covariance = Eigen::MatrixXd::Zero(d, d);
  for (size_t i = 0; i < batch.parameters.size(); ++i) {
    const Eigen::VectorXd diff = batch.parameters[i] - next.mean;
    next.covariance += w(static_cast<Eigen::Index>(i)) * (diff * diff.transpose());
  }
  next.covariance = 0.5 * (next.covariance + next.covariance.transpose());
  next.covariance.diagonal().array() += cov_floor;
  next.validate();
  return next;
}

double effective_sample_size(const std::vector<double>& rewards, double eta) {
  const Eigen::VectorXd w = exponential_weights(rewards, eta);
  return 1.0 / w.squaredNorm();
}

SampleBatch sample_batch(const SearchDistribution& dist, int n, Rng& rng) {
  dist.validate();
  Eigen::LLT<Eigen::MatrixXd> llt(dist.covariance);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sample_batch: covariance factorization failed");
  const Eigen::MatrixXd chol = llt.matrixL();
  SampleBatch batch;
  batch.parameters.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd z = standard_normal_vector(dist.dim(), rng);
    batch.parameters.push_back(dist.mean + chol * z);
  }
  return batch;
}

std::pair<SearchDistribution, IterationStats> reps_step(
    const SearchDistribution& current, const RewardFunction& evaluate,
    const RepsConfig& config, Rng& rng) {
  SampleBatch batch = sample_batch(current, config.samples_per_iteration, rng);
  batch.rewards.resize(batch.parameters.size());
  for (size_t i = 0; i < batch.parameters.size(); ++i) {
    const double r = evaluate(batch.parameters[i]);
    if (!std::isfinite(r)) {
      throw std::runtime_error("reps_step: non-finite reward for sample " +
                               std::to_string(i));
    }
    batch.rewards[i] = r;
  }

  const double eta = solve_eta(batch.rewards, config.epsilon, config.eta_min);
  SearchDistribution next = weighted_update(batch, eta, current, config.cov_floor);

  IterationStats stats;
  stats.mean_reward =
      Eigen::Map<const Eigen::VectorXd>(batch.rewards.data(),
                                        static_cast<Eigen::Index>(batch.rewards.size()))
          .mean();
  stats.max_reward = *std::max_element(batch.rewards.begin(), batch.rewards.end());
  stats.eta = eta;
  stats.kl_to_previous =
      gaussian_kl(next.mean, next.covariance, current.mean, current.covariance);
  stats.effective_sample_size = effective_sample_size(batch.rewards, eta);
  return {std::move(next), stats};
}

std::pair<SearchDistribution, std::vector<IterationStats>> optimize(
    const SearchDistribution& init, const RewardFunction& evaluate,
    const RepsConfig& config, Rng& rng) {
  init.validate();
  SearchDistribution dist = init;
  std::vector<IterationStats> curve;
  curve.reserve(static_cast<size_t>(config.num_iterations));
  for (int it = 0; it < config.num_iterations; ++it) {
    auto [next, stats] = reps_step(dist, evaluate, config, rng);
    dist = std::move(next);
    curve.push_back(stats);
  }
  return {std::move(dist), std::move(curve)};
}

}  // namespace skilltx
