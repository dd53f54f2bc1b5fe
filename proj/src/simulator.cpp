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

#include "skilltx/simulator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace skilltx {

namespace {

// 2x3 positional Jacobian of the planar chain at configuration q.
Eigen::Matrix<double, 2, 3> arm_jacobian(const ArmModel& arm,
                                         const Eigen::Vector3d& q) {
  const FkResult fk = forward_kinematics(arm, q);
  Eigen::Matrix<double, 2, 3> jac;
  for (int j = 0; j < 3; ++j) {
    const Eigen::Vector2d r = fk.ee - fk.points[static_cast<size_t>(j)];
    jac(0, j) = -r.y();
    jac(1, j) = r.x();
  }
  return jac;
}

}  // namespace

Eigen::Vector3d ArmModel::clamp(const Eigen::Vector3d& q) const {
  Eigen::Vector3d out;
  for (int j = 0; j < 3; ++j) {
    const auto& [lo, hi] = joint_limits[static_cast<size_t>(j)];
    out(j) = std::min(hi, std::max(lo, q(j)));
  }
  return out;
}

void ArmModel::validate() const {
  for (int j = 0; j < 3; ++j) {
    if (!(link_lengths[static_cast<size_t>(j)] > 0.0))
      throw std::invalid_argument("ArmModel: link lengths must be > 0");
    const auto& [lo, hi] = joint_limits[static_cast<size_t>(j)];
    if (!(lo < hi)) throw std::invalid_argument("ArmModel: joint limits inverted");
  }
}

void SimConfig::validate() const {
  if (!(object_radius > 0.0) || !(ee_radius > 0.0))
    throw std::invalid_argument("SimConfig: radii must be > 0");
  if (slip < 0.0 || slip > 1.0)
    throw std::invalid_argument("SimConfig: slip must be in [0, 1]");
  if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be > 0");
  if (num_steps < 1) throw std::invalid_argument("SimConfig: num_steps must be >= 1");
}

FkResult forward_kinematics(const ArmModel& arm, const Eigen::Vector3d& q) {
  FkResult fk;
  fk.points[0] = arm.base_position;
  double angle = 0.0;
  for (int j = 0; j < 3; ++j) {
    angle += q(j);
    fk.points[static_cast<size_t>(j) + 1] =
        fk.points[static_cast<size_t>(j)] +
        arm.link_lengths[static_cast<size_t>(j)] *
            Eigen::Vector2d(std::cos(angle), std::sin(angle));
  }
  fk.ee = fk.points[3];
  return fk;
}

RolloutResult rollout(const ArmModel& arm, const SimConfig& sim,
                      const Trajectory& joints, const WorldState& initial) {
  arm.validate();
  sim.validate();
  if (joints.num_dims() != 3)
    throw std::invalid_argument("rollout: joint trajectory must have 3 dims");
  if (joints.num_steps() != sim.num_steps)
    throw std::invalid_argument("rollout: trajectory length != sim.num_steps");

  const double r_sum = sim.contact_distance();
  RolloutResult result;
  result.ee_path.resize(sim.num_steps, 2);
  result.object_path.resize(sim.num_steps, 2);
  result.joint_path.resize(sim.num_steps, 3);

  Eigen::Vector2d prev_ee =
      forward_kinematics(arm, arm.clamp(initial.joint_angles)).ee;
  Eigen::Vector2d object = initial.object_center;

  for (int t = 0; t < sim.num_steps; ++t) {
    const Eigen::Vector3d q = arm.clamp(joints.values.row(t).transpose());
    const Eigen::Vector2d ee = forward_kinematics(arm, q).ee;
    const Eigen::Vector2d delta = ee - prev_ee;

    const Eigen::Vector2d to_object = object - ee;
    const double dist = to_object.norm();
    if (dist < r_sum) {
      Eigen::Vector2d normal;
      if (dist > 1e-12) {
        normal = to_object / dist;
      } else if (delta.norm() > 1e-12) {
        normal = delta.normalized();
      } else {
        normal = Eigen::Vector2d(1.0, 0.0);
      }
      const double penetration = r_sum - dist;
      const Eigen::Vector2d tangential = delta - delta.dot(normal) * normal;
      object += penetration * normal + sim.slip * tangential;
    }

    result.joint_path.row(t) = q.transpose();
    result.ee_path.row(t) = ee.transpose();
    result.object_path.row(t) = object.transpose();
    prev_ee = ee;
  }
  return result;
}

Eigen::Vector3d ik_solve(const ArmModel& arm, const Eigen::Vector2d& target,
                         const Eigen::Vector3d& seed_q, double tol,
                         int max_iters) {
  if (!target.allFinite())
    throw std::invalid_argument("ik_solve: non-finite target");
  constexpr double kDamping = 0.05;
  constexpr double kMaxStep = 0.5;  // rad, per joint per iterate

  Eigen::Vector3d q = arm.clamp(seed_q);
  double residual = (target - forward_kinematics(arm, q).ee).norm();
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::Vector2d error = target - forward_kinematics(arm, q).ee;
    residual = error.norm();
    if (residual <= tol) return q;
    const Eigen::Matrix<double, 2, 3> jac = arm_jacobian(arm, q);
    Eigen::Matrix2d jjt = jac * jac.transpose();
    jjt.diagonal().array() += kDamping * kDamping;
    Eigen::Vector3d step = jac.transpose() * jjt.ldlt().solve(error);
    const double max_abs = step.cwiseAbs().maxCoeff();
    if (max_abs > kMaxStep) step *= kMaxStep / max_abs;
    q = arm.clamp(q + step);
  }
  throw std::runtime_error("ik_solve: no solution within tolerance, residual " +
                           std::to_string(residual));
}

Trajectory scripted_push_demo(const ArmModel& arm, const SimConfig& sim,
                              const TaskDescriptor& desired_object_path,
                              double approach_offset, double noise, Rng& rng) {
  desired_object_path.validate();
  if (!(approach_offset > 0.0))
    throw std::invalid_argument("scripted_push_demo: approach_offset must be > 0");
  if (noise < 0.0)
    throw std::invalid_argument("scripted_push_demo: noise must be >= 0");
  const auto& path = desired_object_path.object_path;
  const Eigen::Index steps = path.rows();

  // local tangents; stationary segments reuse the next (then last) moving one
  Eigen::MatrixXd tangents(steps, 2);
  Eigen::Vector2d last_tangent = Eigen::Vector2d::Zero();
  for (Eigen::Index t = steps - 2; t >= 0; --t) {
    const Eigen::Vector2d diff = path.row(t + 1) - path.row(t);
    if (diff.norm() > 1e-12) last_tangent = diff.normalized();
    tangents.row(t) = last_tangent.transpose();
  }
  if (last_tangent.norm() < 0.5)
    throw std::invalid_argument("scripted_push_demo: desired path has no motion");
  for (Eigen::Index t = 0; t < steps; ++t) {
    if (tangents.row(t).norm() < 0.5) tangents.row(t) = last_tangent.transpose();
  }
  tangents.row(steps - 1) = tangents.row(steps - 2);

  Trajectory traj;
  traj.values.resize(steps, 3);
  traj.dt = sim.dt;
  Eigen::Vector3d seed(0.8, 0.8, 0.4);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const Eigen::Vector2d waypoint =
        path.row(t).transpose() - approach_offset * tangents.row(t).transpose();
    const Eigen::Vector3d q = ik_solve(arm, waypoint, seed, 1e-8, 300);
    seed = q;
    Eigen::Vector3d q_out = q;
    if (noise > 0.0) {
      for (int j = 0; j < 3; ++j) q_out(j) += noise * standard_normal(rng);
    }
    traj.values.row(t) = q_out.transpose();
  }
  return traj;
}

}  // namespace skilltx
