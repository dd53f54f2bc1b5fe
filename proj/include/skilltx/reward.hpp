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

#ifndef SKILLTX_REWARD_HPP
#define SKILLTX_REWARD_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "skilltx/simulator.hpp"
#include "skilltx/skill_library.hpp"

namespace skilltx {

struct RewardConfig {
  double a = 1.0;  // task-tracking weight
  double b = 1.0;  // pushing-proximity weight

  void validate() const;
};

/// Raw distance magnitudes plus the signed total fed to the optimizer.
/// Rewards are maximized, so total = -(a * task_distance + b * push_distance)
/// and zero is the (unattainable) optimum.
struct RewardBreakdown {
  double task_distance = 0.0;
  double push_distance = 0.0;
  double total = 0.0;
};

/// L2 norm of the stacked difference between the target descriptor and the
/// realized object path.
double task_term(const TaskDescriptor& target, const Eigen::MatrixXd& object_path);

/// L2 norm of the stacked end-effector-to-object difference.
double push_term(const Eigen::MatrixXd& ee_path, const Eigen::MatrixXd& object_path);

RewardBreakdown accumulated_reward(const TaskDescriptor& target,
                                   const RolloutResult& rollout,
                                   const RewardConfig& config);

/// Fixes a = 1 and chooses b so that mean(a * task) = ratio * mean(b * push)
/// over the calibration set.
RewardConfig calibrate_ab(
    const std::vector<std::pair<TaskDescriptor, RolloutResult>>& sample_rollouts,
    double ratio);

}  // namespace skilltx

#endif  // SKILLTX_REWARD_HPP
