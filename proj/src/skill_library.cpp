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

#include "skilltx/skill_library.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

namespace skilltx {

void TaskDescriptor::validate() const {
  if (object_path.rows() < 2)
    throw std::invalid_argument("TaskDescriptor: need at least 2 steps");
  if (object_path.cols() != 2)
    throw std::invalid_argument("TaskDescriptor: object_path must be num_steps x 2");
  if (!object_path.allFinite())
    throw std::invalid_argument("TaskDescriptor: non-finite entries");
}

const Skill* SkillLibrary::find(const std::string& id) const {
  for (const auto& skill : skills) {
    if (skill.id == id) return &skill;
  }
  return nullptr;
}

void SkillLibrary::validate() const {
  for (size_t i = 0; i < skills.size(); ++i) {
    const auto& skill = skills[i];
    if (skill.id.empty()) throw std::invalid_argument("SkillLibrary: empty skill id");
    skill.promp.validate();
    skill.descriptor.validate();
    for (size_t j = i + 1; j < skills.size(); ++j) {
      if (skills[j].id == skill.id)
        throw std::invalid_argument("SkillLibrary: duplicate id " + skill.id);
    }
    if (skill.descriptor.num_steps() != skills.front().descriptor.num_steps())
      throw std::invalid_argument("SkillLibrary: descriptor num_steps mismatch");
    if (skill.promp.dim() != skills.front().promp.dim())
      throw std::invalid_argument("SkillLibrary: ProMP dimension mismatch");
  }
}

std::string to_string(TransferMode mode) {
  switch (mode) {
    case TransferMode::kPartial: return "partial";
    case TransferMode::kFull: return "full";
    case TransferMode::kBaseline: return "baseline";
  }
  throw std::logic_error("to_string: unknown TransferMode");
}

TransferMode transfer_mode_from_string(const std::string& name) {
  if (name == "partial") return TransferMode::kPartial;
  if (name == "full") return TransferMode::kFull;
  if (name == "baseline") return TransferMode::kBaseline;
  throw std::invalid_argument("unknown transfer mode: " + name);
}

double descriptor_distance(const TaskDescriptor& a, const TaskDescriptor& b) {
  if (a.object_path.rows() != b.object_path.rows())
    throw std::invalid_argument("descriptor_distance: length mismatch");
  return (a.object_path - b.object_path).norm();
}

std::vector<Skill> knn_select(const SkillLibrary& library,
                              const TaskDescriptor& target, int k) {
  if (k < 1 || static_cast<size_t>(k) > library.size())
    throw std::invalid_argument("knn_select: k exceeds library size");
  std::vector<size_t> order(library.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> distances(library.size());
  for (size_t i = 0; i < library.size(); ++i) {
    distances[i] = descriptor_distance(target, library.skills[i].descriptor);
  }
  // stable sort keeps insertion order on ties
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return distances[a] < distances[b]; });
  std::vector<Skill> selected;
  selected.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) selected.push_back(library.skills[order[i]]);
  return selected;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> combine_sources(
    const std::vector<Skill>& skills) {
  if (skills.empty()) throw std::invalid_argument("combine_sources: empty list");
  const Eigen::Index d = skills.front().promp.mean.size();
  const double k = static_cast<double>(skills.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& skill : skills) {
    if (skill.promp.mean.size() != d)
      throw std::invalid_argument("combine_sources: dimension mismatch");
    mean += skill.promp.mean;
  }
  mean /= k;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& skill : skills) {
    const Eigen::VectorXd diff = skill.promp.mean - mean;
    cov += skill.promp.covariance + diff * diff.transpose();
  }
  cov /= k;
  return {std::move(mean), std::move(cov)};
}

TransferInit partial_init(const Eigen::VectorXd& mean_k, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("partial_init: s must be > 0");
  TransferInit init;
  init.mode = TransferMode::kPartial;
  init.mean = mean_k;
  init.covariance =
      s * Eigen::MatrixXd::Identity(mean_k.size(), mean_k.size());
  return init;
}

TransferInit full_init(const Eigen::VectorXd& mean_k,
                       const Eigen::MatrixXd& cov_k, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("full_init: s must be > 0");
  const double max_diag = cov_k.diagonal().maxCoeff();
  if (!(max_diag > 0.0))
    throw std::invalid_argument("full_init: degenerate source covariance");
  TransferInit init;
  init.mode = TransferMode::kFull;
  init.mean = mean_k;
  init.covariance = (s / max_diag) * cov_k;
  return init;
}

TransferInit baseline_init(const SkillLibrary& library, double s, Rng& rng) {
  if (library.empty()) throw std::invalid_argument("baseline_init: empty library");
  if (!(s > 0.0)) throw std::invalid_argument("baseline_init: s must be > 0");
  const auto& first = library.skills.front().promp;
  const Eigen::Index d = first.mean.size();
  const int nb = first.basis.num_basis;

  Eigen::VectorXd mean_all = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd lo = library.skills.front().promp.mean;
  Eigen::VectorXd hi = lo;
  for (const auto& skill : library.skills) {
    mean_all += skill.promp.mean;
    lo = lo.cwiseMin(skill.promp.mean);
    hi = hi.cwiseMax(skill.promp.mean);
  }
  mean_all /= static_cast<double>(library.size());

  // random component drawn within the envelope of library means
  Eigen::VectorXd random_mean(d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    random_mean(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
  }

  // per-basis blend weight from the normalized basis activations at step 0,
  // broadcast across dimensions
  const Eigen::MatrixXd phi = basis_matrix(first.basis);
  const Eigen::VectorXd psi0 = phi.row(0).transpose();
  const Eigen::VectorXd lambda = psi0 / psi0.maxCoeff();

  TransferInit init;
  init.mode = TransferMode::kBaseline;
  init.mean.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double l = lambda(i % nb);
    init.mean(i) = l * mean_all(i) + (1.0 - l) * random_mean(i);
  }
  init.covariance = s * Eigen::MatrixXd::Identity(d, d);
  return init;
}

SkillLibrary add_skill(const SkillLibrary& library, Skill skill) {
  if (library.find(skill.id) != nullptr)
    throw std::invalid_argument("add_skill: duplicate id " + skill.id);
  SkillLibrary grown = library;
  grown.skills.push_back(std::move(skill));
  grown.validate();
  return grown;
}

void save_library(const SkillLibrary& library, const std::string& path) {
  library.validate();
  nlohmann::json j;
  j["version"] = 1;
  nlohmann::json skills = nlohmann::json::array();
  for (const auto& skill : library.skills) {
    nlohmann::json entry;
    entry["id"] = skill.id;
    entry["promp"] = promp_to_json(skill.promp);
    nlohmann::json path_rows = nlohmann::json::array();
    for (Eigen::Index t = 0; t < skill.descriptor.object_path.rows(); ++t) {
      path_rows.push_back({skill.descriptor.object_path(t, 0),
                           skill.descriptor.object_path(t, 1)});
    }
    entry["descriptor"] = std::move(path_rows);
    skills.push_back(std::move(entry));
  }
  j["skills"] = std::move(skills);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_library: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("save_library: write failed for " + path);
}

SkillLibrary load_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_library: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);  // throws on malformed input
  if (j.at("version").get<int>() != 1)
    throw std::runtime_error("load_library: unsupported version");
  SkillLibrary library;
  for (const auto& entry : j.at("skills")) {
    Skill skill;
    skill.id = entry.at("id").get<std::string>();
    skill.promp = promp_from_json(entry.at("promp"));
    const auto& rows = entry.at("descriptor");
    skill.descriptor.object_path.resize(static_cast<Eigen::Index>(rows.size()), 2);
    for (size_t t = 0; t < rows.size(); ++t) {
      skill.descriptor.object_path(static_cast<Eigen::Index>(t), 0) =
          rows[t].at(0).get<double>();
      skill.descriptor.object_path(static_cast<Eigen::Index>(t), 1) =
          rows[t].at(1).get<double>();
    }
    library.skills.push_back(std::move(skill));
  }
  library.validate();
  return library;
}

}  // namespace skilltx
