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

#include "skilltx/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace skilltx {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

TaskDescriptor straight_push(const Eigen::Vector2d& start, double angle_rad,
                             double length, int num_steps) {
  const Eigen::Vector2d dir(std::cos(angle_rad), std::sin(angle_rad));
  TaskDescriptor descriptor;
  descriptor.object_path.resize(num_steps, 2);
  for (int t = 0; t < num_steps; ++t) {
    const double alpha = static_cast<double>(t) / (num_steps - 1);
    descriptor.object_path.row(t) = (start + alpha * length * dir).transpose();
  }
  return descriptor;
}

double task_angle_rad(int task_index, const DatasetParams& params) {
  const double span = params.fan_end_deg - params.fan_start_deg;
  const double deg =
      params.fan_start_deg + span * task_index / (params.num_tasks - 1);
  return deg * std::numbers::pi / 180.0;
}

// Evaluator with the feature matrix computed once per run.
struct CachedEvaluator {
  const Dataset* dataset;
  const TaskDescriptor* target;
  const RewardConfig* reward;
  Eigen::MatrixXd phi;

  explicit CachedEvaluator(const Dataset& ds, const TaskDescriptor& tgt,
                           const RewardConfig& rw)
      : dataset(&ds), target(&tgt), reward(&rw), phi(basis_matrix(ds.basis)) {}

  double operator()(const Eigen::VectorXd& parameters) const {
    const WeightVector w =
        unflatten_weights(parameters, dataset->basis.num_basis, 3);
    Trajectory traj;
    traj.values = phi * w.weights;
    traj.dt = dataset->sim.dt;
    const RolloutResult roll =
        rollout(dataset->arm, dataset->sim, traj, dataset->start_state);
    return accumulated_reward(*target, roll, *reward).total;
  }
};

void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn) {
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (jobs <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(jobs));
  for (int j = 0; j < jobs; ++j) {
    workers.emplace_back([&] {
      for (size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<Skill> seeded_subset(const std::vector<Skill>& pool, int count,
                                 Rng& rng) {
  std::vector<size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = 0; i < static_cast<size_t>(count); ++i) {
    std::uniform_int_distribution<size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<Skill> subset;
  subset.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) subset.push_back(pool[order[static_cast<size_t>(i)]]);
  return subset;
}

int group_mode_rank(TransferMode mode) { return static_cast<int>(mode); }

}  // namespace

std::string to_string(DatasetVariant variant) {
  return variant == DatasetVariant::kA ? "A" : "B";
}

DatasetVariant variant_from_string(const std::string& name) {
  if (name == "A" || name == "a") return DatasetVariant::kA;
  if (name == "B" || name == "b") return DatasetVariant::kB;
  throw std::invalid_argument("unknown dataset variant: " + name);
}

void ExperimentConfig::validate() const {
  if (k < 1) throw std::invalid_argument("ExperimentConfig: k must be >= 1");
  if (library_size < k)
    throw std::invalid_argument("ExperimentConfig: k exceeds library_size");
  if (num_iterations < 0 || samples_per_iteration < 2)
    throw std::invalid_argument("ExperimentConfig: bad iteration settings");
  if (!(epsilon > 0.0) || !(s > 0.0))
    throw std::invalid_argument("ExperimentConfig: epsilon and s must be > 0");
  if (seeds.empty())
    throw std::invalid_argument("ExperimentConfig: seeds must be nonempty");
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

TaskDescriptor dataset_task_descriptor(int task_index, const SimConfig& sim,
                                       const DatasetParams& params) {
  if (task_index < 0 || task_index >= params.num_tasks)
    throw std::invalid_argument("dataset_task_descriptor: index out of range");
  return straight_push(params.object_start, task_angle_rad(task_index, params),
                       params.push_length, sim.num_steps);
}

Dataset generate_dataset(DatasetVariant variant, std::uint64_t seed,
                         const SimConfig& sim, const ArmModel& arm,
                         const DatasetParams& params) {
  arm.validate();
  sim.validate();
  if (params.num_tasks < 2 || params.demos_per_task < 2)
    throw std::invalid_argument("generate_dataset: need >= 2 tasks and demos");

  Dataset dataset;
  dataset.variant = variant;
  dataset.arm = arm;
  dataset.sim = sim;
  dataset.basis = BasisSet::linear(params.num_basis, sim.num_steps);

  const Eigen::Vector2d object_start = params.object_start;
  const Eigen::Vector2d outward = (object_start - arm.base_position).normalized();
  const double start_distance = variant == DatasetVariant::kA
                                    ? sim.contact_distance()
                                    : params.retreat_distance;
  const Eigen::Vector2d start_ee = object_start - start_distance * outward;
  dataset.start_state.joint_angles =
      ik_solve(arm, start_ee, Eigen::Vector3d(0.8, 0.8, 0.4), 1e-10, 2000);
  dataset.start_state.object_center = object_start;

  for (int i = 0; i < params.num_tasks; ++i) {
    const double nominal_angle = task_angle_rad(i, params);
    std::vector<Trajectory> demos;
    demos.reserve(static_cast<size_t>(params.demos_per_task));
    for (int j = 0; j < params.demos_per_task; ++j) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i),
                       static_cast<std::uint64_t>(j)));
      // per-demo task perturbation stands in for demonstrator variability
      const double angle = nominal_angle +
                           params.demo_angle_jitter_deg * std::numbers::pi / 180.0 *
                               standard_normal(rng);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      const double length =
          params.push_length * (1.0 + params.demo_length_jitter * unit(rng));
      const double offset = params.approach_offset + params.demo_offset_jitter * unit(rng);
      const TaskDescriptor perturbed =
          straight_push(object_start, angle, length, sim.num_steps);
      demos.push_back(scripted_push_demo(arm, sim, perturbed, offset,
                                         params.demo_joint_noise, rng));
    }
    Skill skill;
    char id[8];
    std::snprintf(id, sizeof(id), "%s%02d", to_string(variant).c_str(), i);
    skill.id = id;
    skill.promp = fit_promp(demos, dataset.basis, params.ridge, params.cov_reg);
    skill.descriptor = dataset_task_descriptor(i, sim, params);
    dataset.library.skills.push_back(std::move(skill));
  }
  dataset.library.validate();
  return dataset;
}

double evaluate_parameters(const Eigen::VectorXd& params, const Dataset& dataset,
                           const TaskDescriptor& target,
                           const RewardConfig& reward) {
  const WeightVector w = unflatten_weights(params, dataset.basis.num_basis, 3);
  const Trajectory traj = render_trajectory(dataset.basis, w, dataset.sim.dt);
  const RolloutResult roll =
      rollout(dataset.arm, dataset.sim, traj, dataset.start_state);
  return accumulated_reward(target, roll, reward).total;
}

TransferInit build_init(const ExperimentConfig& config, const Dataset& dataset,
                        const std::string& target_id, std::uint64_t seed) {
  const Skill* target = dataset.library.find(target_id);
  if (target == nullptr)
    throw std::invalid_argument("build_init: unknown target " + target_id);

  SkillLibrary pool;
  for (const auto& skill : dataset.library.skills) {
    if (skill.id != target_id) pool.skills.push_back(skill);
  }
  if (config.library_size > static_cast<int>(pool.size()))
    throw std::invalid_argument("build_init: library_size exceeds available skills");

  if (config.library_size < static_cast<int>(pool.size())) {
    if (config.library_size > config.k) {
      pool.skills = knn_select(pool, target->descriptor, config.library_size);
    } else {
      // small-library setting: no k-NN choice left, subset is seeded
      Rng rng(mix_seed(seed, fnv1a64(target_id), 0x5ub5e7ull));
      pool.skills = seeded_subset(pool.skills, config.k, rng);
    }
  }

  switch (config.mode) {
    case TransferMode::kPartial: {
      const std::vector<Skill> sources = knn_select(pool, target->descriptor, config.k);
      const auto [mean, cov] = combine_sources(sources);
      TransferInit init = partial_init(mean, config.s);
      for (const auto& skill : sources) init.source_ids.push_back(skill.id);
      return init;
    }
    case TransferMode::kFull: {
      const std::vector<Skill> sources = knn_select(pool, target->descriptor, config.k);
      const auto [mean, cov] = combine_sources(sources);
      TransferInit init = full_init(mean, cov, config.s);
      for (const auto& skill : sources) init.source_ids.push_back(skill.id);
      return init;
    }
    case TransferMode::kBaseline: {
      Rng rng(mix_seed(seed, fnv1a64(target_id), 0xba5e11ull));
      return baseline_init(pool, config.s, rng);
    }
  }
  throw std::logic_error("build_init: unknown mode");
}

std::vector<RunRecord> run_transfer_experiment(const ExperimentConfig& config,
                                               const Dataset& dataset,
                                               const RewardConfig& reward,
                                               int jobs) {
  config.validate();
  reward.validate();
  dataset.library.validate();

  std::vector<std::pair<size_t, std::uint64_t>> runs;
  for (size_t target = 0; target < dataset.library.size(); ++target) {
    for (const std::uint64_t seed : config.seeds) runs.emplace_back(target, seed);
  }
  std::vector<RunRecord> records(runs.size());

  parallel_for(runs.size(), jobs, [&](size_t idx) {
    const auto [target_idx, seed] = runs[idx];
    const Skill& target = dataset.library.skills[target_idx];
    const TransferInit init = build_init(config, dataset, target.id, seed);

    const CachedEvaluator evaluate(dataset, target.descriptor, reward);

    RunRecord record;
    record.config = config;
    record.target_skill_id = target.id;
    record.seed = seed;
    record.source_ids = init.source_ids;
    record.init_mean = init.mean;
    record.initial_reward = evaluate(init.mean);

    RepsConfig reps;
    reps.epsilon = config.epsilon;
    reps.samples_per_iteration = config.samples_per_iteration;
    reps.num_iterations = config.num_iterations;

    SearchDistribution start;
    start.mean = init.mean;
    start.covariance = init.covariance;
    Rng rng(mix_seed(seed, fnv1a64(target.id), 0x0e75ull));
    auto [final_dist, curve] =
        optimize(start, std::cref(evaluate), reps, rng);
    record.curve = std::move(curve);
    record.final_mean = final_dist.mean;
    records[idx] = std::move(record);
  });
  return records;
}

double similarity_to_init(const RunRecord& record, const TransferInit& init) {
  if (record.final_mean.size() != init.mean.size())
    throw std::invalid_argument("similarity_to_init: dimension mismatch");
  return (record.final_mean - init.mean).norm();
}

std::vector<GroupSummary> aggregate(std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");

  using Key = std::tuple<int, int, int>;  // dataset, mode rank, k
  std::map<Key, std::vector<size_t>> groups;
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& cfg = records[i].config;
    groups[{static_cast<int>(cfg.dataset), group_mode_rank(cfg.mode), cfg.k}]
        .push_back(i);
  }

  // threshold per (dataset, k): the matching baseline group's final value,
  // falling back to any baseline group on the same dataset
  std::map<std::pair<int, int>, double> baseline_final;
  std::map<int, double> baseline_final_any_k;
  for (const auto& [key, members] : groups) {
    const auto& [dataset, mode_rank, k] = key;
    if (mode_rank != group_mode_rank(TransferMode::kBaseline)) continue;
    double mean_final = 0.0;
    for (const size_t i : members) {
      if (records[i].curve.empty())
        throw std::invalid_argument("aggregate: empty curve in baseline record");
      mean_final += records[i].curve.back().mean_reward;
    }
    mean_final /= static_cast<double>(members.size());
    baseline_final[{dataset, k}] = mean_final;
    baseline_final_any_k.emplace(dataset, mean_final);
  }

  std::vector<GroupSummary> summaries;
  for (const auto& [key, members] : groups) {
    const auto& [dataset, mode_rank, k] = key;
    const auto& first_cfg = records[members.front()].config;
    for (const size_t i : members) {
      const auto& cfg = records[i].config;
      if (cfg.num_iterations != first_cfg.num_iterations ||
          cfg.samples_per_iteration != first_cfg.samples_per_iteration ||
          cfg.epsilon != first_cfg.epsilon || cfg.s != first_cfg.s ||
          cfg.library_size != first_cfg.library_size)
        throw std::invalid_argument("aggregate: mixed configs in one group");
    }

    GroupSummary summary;
    summary.mode = first_cfg.mode;
    summary.k = k;
    summary.dataset = first_cfg.dataset;
    summary.num_records = static_cast<int>(members.size());

    const size_t iterations = records[members.front()].curve.size();
    summary.mean_curve.assign(iterations, 0.0);
    summary.std_curve.assign(iterations, 0.0);
    for (const size_t i : members) {
      if (records[i].curve.size() != iterations)
        throw std::invalid_argument("aggregate: curve length mismatch in group");
      for (size_t t = 0; t < iterations; ++t)
        summary.mean_curve[t] += records[i].curve[t].mean_reward;
    }
    for (double& v : summary.mean_curve) v /= static_cast<double>(members.size());
    for (const size_t i : members) {
      for (size_t t = 0; t < iterations; ++t) {
        const double d = records[i].curve[t].mean_reward - summary.mean_curve[t];
        summary.std_curve[t] += d * d;
      }
    }
    for (double& v : summary.std_curve)
      v = std::sqrt(v / static_cast<double>(members.size()));

    summary.final_asymptote = iterations > 0 ? summary.mean_curve.back() : 0.0;

    double mean_initial = 0.0;
    double mean_similarity = 0.0;
    for (const size_t i : members) {
      mean_initial += records[i].initial_reward;
      mean_similarity += (records[i].final_mean - records[i].init_mean).norm();
    }
    summary.mean_initial_reward = mean_initial / static_cast<double>(members.size());
    summary.mean_similarity_to_init =
        mean_similarity / static_cast<double>(members.size());

    double threshold = std::numeric_limits<double>::quiet_NaN();
    if (const auto it = baseline_final.find({dataset, k}); it != baseline_final.end()) {
      threshold = it->second;
    } else if (const auto any = baseline_final_any_k.find(dataset);
               any != baseline_final_any_k.end()) {
      threshold = any->second;
    }
    if (std::isnan(threshold)) {
      summary.mean_iterations_to_threshold = threshold;
    } else {
      double total = 0.0;
      for (const size_t i : members) {
        auto& record = records[i];
        record.iterations_to_threshold.reset();
        for (size_t t = 0; t < record.curve.size(); ++t) {
          if (record.curve[t].mean_reward >= threshold) {
            record.iterations_to_threshold = static_cast<int>(t) + 1;
            break;
          }
        }
        // unreached runs count as the full budget
        total += record.iterations_to_threshold
                     ? static_cast<double>(*record.iterations_to_threshold)
                     : static_cast<double>(record.curve.size());
      }
      summary.mean_iterations_to_threshold =
          total / static_cast<double>(members.size());
    }
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

std::vector<std::pair<TaskDescriptor, RolloutResult>> calibration_rollouts(
    const Dataset& dataset, int count, std::uint64_t seed, double s) {
  if (count < 1) throw std::invalid_argument("calibration_rollouts: count < 1");
  Rng rng(mix_seed(seed, 0xca11ull));
  const TransferInit base = baseline_init(dataset.library, s, rng);
  const Eigen::MatrixXd phi = basis_matrix(dataset.basis);

  std::vector<std::pair<TaskDescriptor, RolloutResult>> out;
  out.reserve(static_cast<size_t>(count));
  const size_t num_skills = dataset.library.size();
  for (int i = 0; i < count; ++i) {
    const Eigen::VectorXd params = sample_gaussian(base.mean, base.covariance, rng);
    const WeightVector w = unflatten_weights(params, dataset.basis.num_basis, 3);
    Trajectory traj;
    traj.values = phi * w.weights;
    traj.dt = dataset.sim.dt;
    const RolloutResult roll =
        rollout(dataset.arm, dataset.sim, traj, dataset.start_state);
    const auto& target =
        dataset.library.skills[static_cast<size_t>(i) % num_skills].descriptor;
    out.emplace_back(target, roll);
  }
  return out;
}

// ---- experiment config file ----

namespace {

std::vector<std::uint64_t> parse_seed_list(const nlohmann::json& j) {
  std::vector<std::uint64_t> seeds;
  for (const auto& s : j) seeds.push_back(s.get<std::uint64_t>());
  return seeds;
}

SimConfig parse_sim_block(const nlohmann::json& j, ArmModel& arm) {
  SimConfig sim;
  if (j.contains("object_radius")) sim.object_radius = j["object_radius"].get<double>();
  if (j.contains("ee_radius")) sim.ee_radius = j["ee_radius"].get<double>();
  if (j.contains("slip")) sim.slip = j["slip"].get<double>();
  if (j.contains("dt")) sim.dt = j["dt"].get<double>();
  if (j.contains("num_steps")) sim.num_steps = j["num_steps"].get<int>();
  if (j.contains("link_lengths")) {
    const auto lengths = j["link_lengths"].get<std::vector<double>>();
    if (lengths.size() != 3)
      throw std::invalid_argument("simulator.link_lengths must have 3 entries");
    std::copy(lengths.begin(), lengths.end(), arm.link_lengths.begin());
  }
  if (j.contains("joint_limit")) {
    const double limit = j["joint_limit"].get<double>();
    for (auto& [lo, hi] : arm.joint_limits) {
      lo = -limit;
      hi = limit;
    }
  }
  if (j.contains("base_position")) {
    const auto base = j["base_position"].get<std::vector<double>>();
    if (base.size() != 2)
      throw std::invalid_argument("simulator.base_position must have 2 entries");
    arm.base_position = Eigen::Vector2d(base[0], base[1]);
  }
  return sim;
}

DatasetParams parse_params_block(const nlohmann::json& j) {
  DatasetParams params;
  if (j.contains("num_tasks")) params.num_tasks = j["num_tasks"].get<int>();
  if (j.contains("demos_per_task")) params.demos_per_task = j["demos_per_task"].get<int>();
  if (j.contains("num_basis")) params.num_basis = j["num_basis"].get<int>();
  if (j.contains("object_start")) {
    const auto start = j["object_start"].get<std::vector<double>>();
    if (start.size() != 2)
      throw std::invalid_argument("dataset.object_start must have 2 entries");
    params.object_start = Eigen::Vector2d(start[0], start[1]);
  }
  if (j.contains("push_length")) params.push_length = j["push_length"].get<double>();
  if (j.contains("fan_start_deg")) params.fan_start_deg = j["fan_start_deg"].get<double>();
  if (j.contains("fan_end_deg")) params.fan_end_deg = j["fan_end_deg"].get<double>();
  if (j.contains("retreat_distance"))
    params.retreat_distance = j["retreat_distance"].get<double>();
  if (j.contains("approach_offset"))
    params.approach_offset = j["approach_offset"].get<double>();
  if (j.contains("demo_joint_noise"))
    params.demo_joint_noise = j["demo_joint_noise"].get<double>();
  if (j.contains("demo_angle_jitter_deg"))
    params.demo_angle_jitter_deg = j["demo_angle_jitter_deg"].get<double>();
  if (j.contains("demo_length_jitter"))
    params.demo_length_jitter = j["demo_length_jitter"].get<double>();
  if (j.contains("demo_offset_jitter"))
    params.demo_offset_jitter = j["demo_offset_jitter"].get<double>();
  if (j.contains("ridge")) params.ridge = j["ridge"].get<double>();
  if (j.contains("cov_reg")) params.cov_reg = j["cov_reg"].get<double>();
  return params;
}

}  // namespace

std::string config_hash_hex(const nlohmann::json& j) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buffer;
}

ExperimentFile parse_experiment_json(const nlohmann::json& j) {
  ExperimentFile file;
  file.hash = config_hash_hex(j);
  file.dataset = variant_from_string(j.value("dataset", std::string("A")));
  file.dataset_seed = j.value("dataset_seed", std::uint64_t{7});

  const auto& mode_field = j.contains("mode") ? j.at("mode") : j.at("modes");
  if (mode_field.is_array()) {
    for (const auto& m : mode_field)
      file.modes.push_back(transfer_mode_from_string(m.get<std::string>()));
  } else {
    file.modes.push_back(transfer_mode_from_string(mode_field.get<std::string>()));
  }
  const auto& k_field = j.contains("k") ? j.at("k") : j.at("k_values");
  if (k_field.is_array()) {
    for (const auto& k : k_field) file.k_values.push_back(k.get<int>());
  } else {
    file.k_values.push_back(k_field.get<int>());
  }

  file.library_size = j.value("library_size", 9);
  file.num_iterations = j.value("num_iterations", 40);
  file.samples_per_iteration = j.value("samples_per_iteration", 30);
  file.epsilon = j.value("epsilon", 0.5);
  file.s = j.value("s", 0.05);
  if (!j.contains("seeds")) throw std::invalid_argument("config: missing seeds");
  file.seeds = parse_seed_list(j.at("seeds"));
  file.output_dir = j.value("output_dir", std::string("out"));

  if (j.contains("simulator")) file.sim = parse_sim_block(j.at("simulator"), file.arm);
  if (j.contains("dataset_params")) file.params = parse_params_block(j.at("dataset_params"));

  if (j.contains("reward")) {
    const auto& r = j.at("reward");
    if (r.contains("a") && r.contains("b")) {
      RewardConfig reward;
      reward.a = r.at("a").get<double>();
      reward.b = r.at("b").get<double>();
      reward.validate();
      file.reward = reward;
    }
    if (r.contains("ratio")) file.calibration_ratio = r.at("ratio").get<double>();
    if (r.contains("rollouts")) file.calibration_rollouts = r.at("rollouts").get<int>();
    if (r.contains("seed")) file.calibration_seed = r.at("seed").get<std::uint64_t>();
  }
  return file;
}

ExperimentFile parse_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_experiment_json(nlohmann::json::parse(in));
}

// ---- output writers / readers ----

void write_curve_csv(const std::vector<IterationStats>& curve,
                     const std::string& path, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_curve_csv: cannot open " + path);
  out << "# " << header_comment << "\n";
  out << "iteration,mean_reward,max_reward,eta,kl,ess\n";
  for (size_t i = 0; i < curve.size(); ++i) {
    const auto& s = curve[i];
    out << (i + 1) << "," << format_double(s.mean_reward) << ","
        << format_double(s.max_reward) << "," << format_double(s.eta) << ","
        << format_double(s.kl_to_previous) << ","
        << format_double(s.effective_sample_size) << "\n";
  }
  if (!out) throw std::runtime_error("write_curve_csv: write failed for " + path);
}

std::vector<IterationStats> read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_curve_csv: cannot open " + path);
  std::vector<IterationStats> curve;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("iteration,", 0) != 0)
        throw std::runtime_error("read_curve_csv: missing header in " + path);
      header_seen = true;
      continue;
    }
    std::stringstream row(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(row, field, ',')) values.push_back(std::stod(field));
    if (values.size() != 6)
      throw std::runtime_error("read_curve_csv: bad row in " + path);
    IterationStats stats;
    stats.mean_reward = values[1];
    stats.max_reward = values[2];
    stats.eta = values[3];
    stats.kl_to_previous = values[4];
    stats.effective_sample_size = values[5];
    curve.push_back(stats);
  }
  return curve;
}

void write_rollout_csv(const RolloutResult& rollout, double dt,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_rollout_csv: cannot open " + path);
  out << "t,ee_x,ee_y,obj_x,obj_y,q1,q2,q3\n";
  for (Eigen::Index i = 0; i < rollout.ee_path.rows(); ++i) {
    out << format_double(static_cast<double>(i) * dt) << ","
        << format_double(rollout.ee_path(i, 0)) << ","
        << format_double(rollout.ee_path(i, 1)) << ","
        << format_double(rollout.object_path(i, 0)) << ","
        << format_double(rollout.object_path(i, 1)) << ","
        << format_double(rollout.joint_path(i, 0)) << ","
        << format_double(rollout.joint_path(i, 1)) << ","
        << format_double(rollout.joint_path(i, 2)) << "\n";
  }
}

std::string record_file_name(const RunRecord& record) {
  std::stringstream name;
  name << to_string(record.config.mode) << "_k" << record.config.k << "_"
       << record.target_skill_id << "_s" << record.seed << ".csv";
  return name.str();
}

void write_manifest(const ExperimentFile& file, const RewardConfig& reward,
                    const std::vector<RunRecord>& records,
                    const std::vector<std::string>& record_files,
                    const std::string& path) {
  if (records.size() != record_files.size())
    throw std::invalid_argument("write_manifest: record/file count mismatch");
  nlohmann::json j;
  j["config_hash"] = file.hash;
  j["dataset"] = to_string(file.dataset);
  j["dataset_seed"] = file.dataset_seed;
  j["reward"] = {{"a", reward.a}, {"b", reward.b}};
  j["num_iterations"] = file.num_iterations;
  j["samples_per_iteration"] = file.samples_per_iteration;
  j["epsilon"] = file.epsilon;
  j["s"] = file.s;
  j["library_size"] = file.library_size;
  nlohmann::json entries = nlohmann::json::array();
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& record = records[i];
    nlohmann::json entry;
    entry["file"] = record_files[i];
    entry["mode"] = to_string(record.config.mode);
    entry["k"] = record.config.k;
    entry["dataset"] = to_string(record.config.dataset);
    entry["target"] = record.target_skill_id;
    entry["seed"] = record.seed;
    entry["source_ids"] = record.source_ids;
    entry["initial_reward"] = record.initial_reward;
    entry["final_mean_reward"] =
        record.curve.empty() ? 0.0 : record.curve.back().mean_reward;
    entry["init_mean"] = std::vector<double>(
        record.init_mean.data(), record.init_mean.data() + record.init_mean.size());
    entry["final_mean"] = std::vector<double>(
        record.final_mean.data(), record.final_mean.data() + record.final_mean.size());
    entry["similarity_to_init"] = (record.final_mean - record.init_mean).norm();
    entries.push_back(std::move(entry));
  }
  j["records"] = std::move(entries);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  out << j.dump(2) << "\n";
}

void write_aggregate_csv(const std::vector<GroupSummary>& groups,
                         const std::string& path, const std::string& hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_aggregate_csv: cannot open " + path);
  out << "# config_hash=" << hash << "\n";
  out << "mode,k,dataset,iteration,mean,std\n";
  for (const auto& group : groups) {
    for (size_t t = 0; t < group.mean_curve.size(); ++t) {
      out << to_string(group.mode) << "," << group.k << ","
          << to_string(group.dataset) << "," << (t + 1) << ","
          << format_double(group.mean_curve[t]) << ","
          << format_double(group.std_curve[t]) << "\n";
    }
  }
}

std::vector<GroupSummary> read_aggregate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_aggregate_csv: cannot open " + path);
  std::map<std::tuple<std::string, int, std::string>, GroupSummary> groups;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::stringstream row(line);
    std::string mode, k_text, dataset, iter_text, mean_text, std_text;
    std::getline(row, mode, ',');
    std::getline(row, k_text, ',');
    std::getline(row, dataset, ',');
    std::getline(row, iter_text, ',');
    std::getline(row, mean_text, ',');
    std::getline(row, std_text, ',');
    auto& group = groups[{mode, std::stoi(k_text), dataset}];
    group.mode = transfer_mode_from_string(mode);
    group.k = std::stoi(k_text);
    group.dataset = variant_from_string(dataset);
    group.mean_curve.push_back(std::stod(mean_text));
    group.std_curve.push_back(std::stod(std_text));
  }
  std::vector<GroupSummary> out;
  for (auto& [key, group] : groups) {
    group.final_asymptote =
        group.mean_curve.empty() ? 0.0 : group.mean_curve.back();
    out.push_back(std::move(group));
  }
  return out;
}

void write_summary_csv(const std::vector<GroupSummary>& groups,
                       const std::string& path, const std::string& hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_summary_csv: cannot open " + path);
  out << "# config_hash=" << hash << "\n";
  out << "mode,k,dataset,final_asymptote,mean_initial_reward,"
         "mean_iterations_to_threshold,mean_similarity_to_init,num_records\n";
  for (const auto& group : groups) {
    out << to_string(group.mode) << "," << group.k << ","
        << to_string(group.dataset) << ","
        << format_double(group.final_asymptote) << ","
        << format_double(group.mean_initial_reward) << ","
        << format_double(group.mean_iterations_to_threshold) << ","
        << format_double(group.mean_similarity_to_init) << ","
        << group.num_records << "\n";
  }
}

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string svg_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3f", value);
  return buffer;
}

}  // namespace

void write_curves_svg(const std::vector<GroupSummary>& groups,
                      DatasetVariant dataset, const std::string& path) {
  std::vector<const GroupSummary*> selected;
  for (const auto& group : groups) {
    if (group.dataset == dataset && !group.mean_curve.empty())
      selected.push_back(&group);
  }
  if (selected.empty())
    throw std::invalid_argument("write_curves_svg: no groups for dataset");

  const double width = 720, height = 480;
  const double left = 80, right = 20, top = 24, bottom = 56;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  size_t iterations = 0;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const auto* group : selected) {
    iterations = std::max(iterations, group->mean_curve.size());
    for (size_t t = 0; t < group->mean_curve.size(); ++t) {
      y_min = std::min(y_min, group->mean_curve[t] - group->std_curve[t]);
      y_max = std::max(y_max, group->mean_curve[t] + group->std_curve[t]);
    }
  }
  if (y_max <= y_min) y_max = y_min + 1.0;
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const auto x_of = [&](double it) {
    return left + plot_w * (it - 1.0) / std::max<size_t>(iterations - 1, 1);
  };
  const auto y_of = [&](double v) {
    return top + plot_h * (1.0 - (v - y_min) / (y_max - y_min));
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_curves_svg: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << left + plot_w << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 5; ++tick) {
    const double v = y_min + (y_max - y_min) * tick / 5.0;
    const double y = y_of(v);
    out << "<line x1=\"" << left - 4 << "\" y1=\"" << svg_number(y) << "\" x2=\""
        << left << "\" y2=\"" << svg_number(y) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << svg_number(y + 4)
        << "\" font-size=\"12\" text-anchor=\"end\">" << svg_number(v)
        << "</text>\n";
  }
  for (int tick = 0; tick <= 5; ++tick) {
    const double it = 1.0 + (static_cast<double>(iterations) - 1.0) * tick / 5.0;
    const double x = x_of(it);
    out << "<line x1=\"" << svg_number(x) << "\" y1=\"" << top + plot_h
        << "\" x2=\"" << svg_number(x) << "\" y2=\"" << top + plot_h + 4
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << svg_number(x) << "\" y=\"" << top + plot_h + 18
        << "\" font-size=\"12\" text-anchor=\"middle\">"
        << static_cast<int>(std::lround(it)) << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">iteration</text>\n";
  out << "<text x=\"18\" y=\"" << top + plot_h / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + plot_h / 2 << ")\">mean reward</text>\n";
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << top - 6
      << "\" font-size=\"14\" text-anchor=\"middle\">dataset "
      << to_string(dataset) << "</text>\n";

  for (size_t g = 0; g < selected.size(); ++g) {
    const auto& group = *selected[g];
    const char* color = kPalette[g % (sizeof(kPalette) / sizeof(kPalette[0]))];

    out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (size_t t = 0; t < group.mean_curve.size(); ++t) {
      out << svg_number(x_of(static_cast<double>(t + 1))) << ","
          << svg_number(y_of(group.mean_curve[t] + group.std_curve[t])) << " ";
    }
    for (size_t t = group.mean_curve.size(); t-- > 0;) {
      out << svg_number(x_of(static_cast<double>(t + 1))) << ","
          << svg_number(y_of(group.mean_curve[t] - group.std_curve[t])) << " ";
    }
    out << "\"/>\n";

    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (size_t t = 0; t < group.mean_curve.size(); ++t) {
      out << svg_number(x_of(static_cast<double>(t + 1))) << ","
          << svg_number(y_of(group.mean_curve[t])) << " ";
    }
    out << "\"/>\n";

    const double ly = top + 16 + 18 * static_cast<double>(g);
    const double lx = left + plot_w - 150;
    out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24
        << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\">" << to_string(group.mode) << " k="
        << group.k << "</text>\n";
  }
  out << "</svg>\n";
}

std::string run_experiment_file(const ExperimentFile& file, int jobs) {
  const Dataset dataset = generate_dataset(file.dataset, file.dataset_seed,
                                           file.sim, file.arm, file.params);
  const RewardConfig reward =
      file.reward ? *file.reward
                  : calibrate_ab(calibration_rollouts(dataset,
                                                      file.calibration_rollouts,
                                                      file.calibration_seed, file.s),
                                 file.calibration_ratio);

  std::filesystem::create_directories(file.output_dir);

  std::vector<RunRecord> all_records;
  std::vector<std::string> files;
  for (const TransferMode mode : file.modes) {
    for (const int k : file.k_values) {
      if (k > file.library_size) continue;  // k values valid for N only
      ExperimentConfig config;
      config.dataset = file.dataset;
      config.mode = mode;
      config.k = k;
      config.library_size = file.library_size;
      config.num_iterations = file.num_iterations;
      config.samples_per_iteration = file.samples_per_iteration;
      config.epsilon = file.epsilon;
      config.s = file.s;
      config.seeds = file.seeds;
      config.output_dir = file.output_dir;
      std::vector<RunRecord> records =
          run_transfer_experiment(config, dataset, reward, jobs);
      for (auto& record : records) {
        files.push_back(record_file_name(record));
        all_records.push_back(std::move(record));
      }
    }
  }

  for (size_t i = 0; i < all_records.size(); ++i) {
    const auto& record = all_records[i];
    std::stringstream comment;
    comment << "config_hash=" << file.hash << " mode="
            << to_string(record.config.mode) << " k=" << record.config.k
            << " dataset=" << to_string(record.config.dataset) << " target="
            << record.target_skill_id << " seed=" << record.seed
            << " reward_a=" << format_double(reward.a)
            << " reward_b=" << format_double(reward.b);
    write_curve_csv(record.curve,
                    (std::filesystem::path(file.output_dir) / files[i]).string(),
                    comment.str());
  }

  const std::string manifest_path =
      (std::filesystem::path(file.output_dir) / "manifest.json").string();
  write_manifest(file, reward, all_records, files, manifest_path);
  return manifest_path;
}

}  // namespace skilltx
