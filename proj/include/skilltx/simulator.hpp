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

#ifndef SKILLTX_SIMULATOR_HPP
#define SKILLTX_SIMULATOR_HPP

#include <Eigen/Dense>
#include <array>

#include "skilltx/promp.hpp"
#include "skilltx/skill_library.hpp"

namespace skilltx {

/// 3-DOF planar chain. Angles are cumulative, in radians.
struct ArmModel {
  std::array<double, 3> link_lengths = {0.30, 0.25, 0.15};
  std::array<std::pair<double, double>, 3> joint_limits = {
      std::pair{-2.9, 2.9}, std::pair{-2.9, 2.9}, std::pair{-2.9, 2.9}};
  Eigen::Vector2d base_position = Eigen::Vector2d::Zero();

  double total_reach() const {
    return link_lengths[0] + link_lengths[1] + link_lengths[2];
  }
  Eigen::Vector3d clamp(const Eigen::Vector3d& q) const;
  void validate() const;
};

/// Contact and timing parameters of the quasi-static pushing world.
struct SimConfig {
  double object_radius = 0.04;  // m
  double ee_radius = 0.03;      // m, effective gripper contact disk
  double slip = 0.2;            // tangential motion transfer in [0, 1]
  double dt = 0.004;            // s
  int num_steps = 1250;

  double contact_distance() const { return object_radius + ee_radius; }
  void validate() const;
};

struct WorldState {
  Eigen::Vector3d joint_angles = Eigen::Vector3d::Zero();
  Eigen::Vector2d object_center = Eigen::Vector2d::Zero();
};

struct RolloutResult {
  Eigen::MatrixXd ee_path;      // num_steps x 2
  Eigen::MatrixXd object_path;  // num_steps x 2
  Eigen::MatrixXd joint_path;   // num_steps x 3
};

struct FkResult {
  std::array<Eigen::Vector2d, 4> points;  // base, joint 1, joint 2, ee
  Eigen::Vector2d ee;
};

FkResult forward_kinematics(const ArmModel& arm, const Eigen::Vector3d& q);

/// Execute a joint-space trajectory with exact kinematic tracking. While the
/// end-effector disk overlaps the object disk, the object is translated along
/// the contact normal by the penetration depth plus slip times the tangential
/// end-effector displacement of the step; otherwise it stays put.
RolloutResult rollout(const ArmModel& arm, const SimConfig& sim,
                      const Trajectory& joints, const WorldState& initial);

/// Damped-least-squares inverse kinematics. Throws std::runtime_error if the
/// residual stays above tol after max_iters.
Eigen::Vector3d ik_solve(const ArmModel& arm, const Eigen::Vector2d& target,
                         const Eigen::Vector3d& seed_q, double tol = 1e-8,
                         int max_iters = 300);

/// Joint trajectory whose end-effector trails the desired object path by
/// approach_offset along the path's local tangent, with optional Gaussian
/// joint noise. Substitutes a handcrafted pushing demonstration.
Trajectory scripted_push_demo(const ArmModel& arm, const SimConfig& sim,
                              const TaskDescriptor& desired_object_path,
                              double approach_offset, double noise, Rng& rng);

}  // namespace skilltx

#endif  // SKILLTX_SIMULATOR_HPP
