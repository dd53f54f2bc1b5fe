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

#include "skilltx/reward.hpp"

#include <stdexcept>

namespace skilltx {

void RewardConfig::validate() const {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("RewardConfig: a and b must be > 0");
}

double task_term(const TaskDescriptor& target,
                 const Eigen::MatrixXd& object_path) {
  if (target.object_path.rows() != object_path.rows() ||
      target.object_path.cols() != object_path.cols())
    throw std::invalid_argument("task_term: shape mismatch");
  return (target.object_path - object_path).norm();
}

double push_term(const Eigen::MatrixXd& ee_path,
                 const Eigen::MatrixXd& object_path) {
  if (ee_path.rows() != object_path.rows() || ee_path.cols() != object_path.cols())
    throw std::invalid_argument("push_term: shape mismatch");
  return (ee_path - object_path).norm();
}

RewardBreakdown accumulated_reward(const TaskDescriptor& target,
                                   const RolloutResult& rollout,
                                   const RewardConfig& config) {
  config.validate();
  RewardBreakdown breakdown;
  breakdown.task_distance = task_term(target, rollout.object_path);
  breakdown.push_distance = push_term(rollout.ee_path, rollout.object_path);
  breakdown.total =
      -(config.a * breakdown.task_distance + config.b * breakdown.push_distance);
  return breakdown;
}

RewardConfig calibrate_ab(
    const std::vector<std::pair<TaskDescriptor, RolloutResult>>& sample_rollouts,
    double ratio) {
  if (sample_rollouts.empty())
    throw std::invalid_argument("calibrate_ab: empty calibration set");
  if (!(ratio > 0.0)) throw std::invalid_argument("calibrate_ab: ratio must be > 0");
  double mean_task = 0.0;
  double mean_push = 0.0;
  for (const auto& [target, roll] : sample_rollouts) {
    mean_task += task_term(target, roll.object_path);
    mean_push += push_term(roll.ee_path, roll.object_path);
  }
  mean_task /= static_cast<double>(sample_rollouts.size());
  mean_push /= static_cast<double>(sample_rollouts.size());
  if (!(mean_push > 0.0))
    throw std::invalid_argument("calibrate_ab: zero mean push distance");
  RewardConfig config;
  config.a = 1.0;
  config.b = mean_task / (ratio * mean_push);
  config.validate();
  return config;
}

}  // namespace skilltx
