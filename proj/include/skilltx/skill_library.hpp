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

#ifndef SKILLTX_SKILL_LIBRARY_HPP
#define SKILLTX_SKILL_LIBRARY_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "skilltx/promp.hpp"

namespace skilltx {

/// Desired or observed effect of a skill: the pushed object's x,y position
/// per time step, in meters.
struct TaskDescriptor {
  Eigen::MatrixXd object_path;  // num_steps x 2

  int num_steps() const { return static_cast<int>(object_path.rows()); }
  void validate() const;
};

struct Skill {
  std::string id;
  ProMP promp;
  TaskDescriptor descriptor;
};

/// Ordered, immutable collection of skills; grow with add_skill.
struct SkillLibrary {
  std::vector<Skill> skills;

  size_t size() const { return skills.size(); }
  bool empty() const { return skills.empty(); }
  const Skill* find(const std::string& id) const;
  void validate() const;
};

enum class TransferMode { kPartial, kFull, kBaseline };

std::string to_string(TransferMode mode);
TransferMode transfer_mode_from_string(const std::string& name);

/// Initial REPS search distribution assembled from source knowledge.
struct TransferInit {
  TransferMode mode = TransferMode::kBaseline;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::vector<std::string> source_ids;  // empty for the baseline
};

/// Flattened L2 distance between two descriptors of equal length. No time
/// alignment is performed.
double descriptor_distance(const TaskDescriptor& a, const TaskDescriptor& b);

/// The k skills closest to the target, ascending by distance; ties keep
/// library insertion order.
std::vector<Skill> knn_select(const SkillLibrary& library,
                              const TaskDescriptor& target, int k);

/// Moment-matched equal-weight mixture of the skills' weight distributions:
/// averaged means, averaged covariances plus the between-means scatter.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> combine_sources(
    const std::vector<Skill>& skills);

/// Source mean with isotropic covariance s * I.
TransferInit partial_init(const Eigen::VectorXd& mean_k, double s);

/// Source mean with the source covariance rescaled so its largest diagonal
/// entry equals s.
TransferInit full_init(const Eigen::VectorXd& mean_k,
                       const Eigen::MatrixXd& cov_k, double s);

/// Knowledge-free baseline: blends the library-average mean with a random
/// draw from the per-coordinate envelope of library means, weighted per basis
/// index by the normalized basis activation at step 0; covariance s * I.
TransferInit baseline_init(const SkillLibrary& library, double s, Rng& rng);

/// Value-semantics insert; throws on duplicate id or shape mismatch.
SkillLibrary add_skill(const SkillLibrary& library, Skill skill);

void save_library(const SkillLibrary& library, const std::string& path);
SkillLibrary load_library(const std::string& path);

}  // namespace skilltx

#endif  // SKILLTX_SKILL_LIBRARY_HPP
