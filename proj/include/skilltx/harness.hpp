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

#ifndef SKILLTX_HARNESS_HPP
#define SKILLTX_HARNESS_HPP

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "skilltx/reps.hpp"
#include "skilltx/reward.hpp"
#include "skilltx/simulator.hpp"
#include "skilltx/skill_library.hpp"

namespace skilltx {

enum class DatasetVariant { kA, kB };

std::string to_string(DatasetVariant variant);
DatasetVariant variant_from_string(const std::string& name);

/// Geometry and synthesis constants for the generated pushing datasets.
struct DatasetParams {
  int num_tasks = 10;
  int demos_per_task = 5;
  int num_basis = 6;             // per joint
  Eigen::Vector2d object_start = Eigen::Vector2d(0.0, 0.40);
  double push_length = 0.15;     // m
  double fan_start_deg = 15.0;   // push directions span this fan
  double fan_end_deg = 165.0;
  double retreat_distance = 0.25;  // variant B start, ee to object center (m)
  double approach_offset = 0.065;  // demo ee trails the object path by this
  double demo_joint_noise = 0.01;  // rad
  double demo_angle_jitter_deg = 2.0;   // per-demo task perturbation
  double demo_length_jitter = 0.10;     // relative
  double demo_offset_jitter = 0.003;    // m
  double ridge = 1e-6;
  double cov_reg = 1e-6;
};

/// A synthesized skill collection plus the world it lives in.
struct Dataset {
  DatasetVariant variant = DatasetVariant::kA;
  SkillLibrary library;  // one skill per task
  WorldState start_state;
  ArmModel arm;
  SimConfig sim;
  BasisSet basis;
};

struct ExperimentConfig {
  DatasetVariant dataset = DatasetVariant::kA;
  TransferMode mode = TransferMode::kBaseline;
  int k = 1;
  int library_size = 9;
  int num_iterations = 40;
  int samples_per_iteration = 30;
  double epsilon = 0.5;
  double s = 0.05;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;

  void validate() const;
};

/// One (target, seed) learning run.
struct RunRecord {
  ExperimentConfig config;
  std::string target_skill_id;
  std::uint64_t seed = 0;
  std::vector<IterationStats> curve;
  std::vector<std::string> source_ids;
  Eigen::VectorXd init_mean;
  Eigen::VectorXd final_mean;
  double initial_reward = 0.0;  // reward of the init mean before any update
  std::optional<int> iterations_to_threshold;  // filled by aggregate()
};

struct GroupSummary {
  TransferMode mode = TransferMode::kBaseline;
  int k = 0;
  DatasetVariant dataset = DatasetVariant::kA;
  std::vector<double> mean_curve;
  std::vector<double> std_curve;
  double final_asymptote = 0.0;
  double mean_initial_reward = 0.0;
  double mean_iterations_to_threshold = 0.0;  // NaN without baseline data
  double mean_similarity_to_init = 0.0;
  int num_records = 0;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/// Builds the fan of pushing tasks, synthesizes noisy demonstrations, and
/// fits one skill per task. Deterministic given the seed.
Dataset generate_dataset(DatasetVariant variant, std::uint64_t seed,
                         const SimConfig& sim = SimConfig{},
                         const ArmModel& arm = ArmModel{},
                         const DatasetParams& params = DatasetParams{});

/// The nominal descriptor of task index i (also the skill's stored one).
TaskDescriptor dataset_task_descriptor(int task_index, const SimConfig& sim,
                                       const DatasetParams& params);

/// Reward of a parameter vector: render the weights, roll them out from the
/// dataset start state, and score against the target descriptor.
double evaluate_parameters(const Eigen::VectorXd& params, const Dataset& dataset,
                           const TaskDescriptor& target,
                           const RewardConfig& reward);

/// Builds the configured initialization for one leave-one-out target.
TransferInit build_init(const ExperimentConfig& config, const Dataset& dataset,
                        const std::string& target_id, std::uint64_t seed);

/// Leave-one-out matrix over all targets and seeds. Runs are independent and
/// execute on `jobs` threads.
std::vector<RunRecord> run_transfer_experiment(const ExperimentConfig& config,
                                               const Dataset& dataset,
                                               const RewardConfig& reward,
                                               int jobs = 1);

/// Per-(mode, k, dataset) curve statistics. Fills iterations_to_threshold on
/// the records when a matching baseline group provides the threshold.
std::vector<GroupSummary> aggregate(std::vector<RunRecord>& records);

/// Weight-space distance between a run's final mean and its initialization.
double similarity_to_init(const RunRecord& record, const TransferInit& init);

/// draws from the baseline initialization paired with cycling targets
std::vector<std::pair<TaskDescriptor, RolloutResult>> calibration_rollouts(
    const Dataset& dataset, int count, std::uint64_t seed, double s);

// ---- experiment config file ----

/// Parsed experiment file: the ExperimentConfig fields (mode and k may be
/// given as arrays), dataset generation inputs, and the reward block.
struct ExperimentFile {
  DatasetVariant dataset = DatasetVariant::kA;
  std::uint64_t dataset_seed = 7;
  std::vector<TransferMode> modes;
  std::vector<int> k_values;
  int library_size = 9;
  int num_iterations = 40;
  int samples_per_iteration = 30;
  double epsilon = 0.5;
  double s = 0.05;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  SimConfig sim;
  ArmModel arm;
  DatasetParams params;
  std::optional<RewardConfig> reward;  // absent: calibrate per dataset
  double calibration_ratio = 1.5;
  int calibration_rollouts = 100;
  std::uint64_t calibration_seed = 99;
  std::string hash;  // FNV-1a of the canonical config text
};

ExperimentFile parse_experiment_file(const std::string& path);
ExperimentFile parse_experiment_json(const nlohmann::json& j);

/// FNV-1a 64 over a canonical JSON dump, as 16 hex digits.
std::string config_hash_hex(const nlohmann::json& j);

// ---- output writers / readers ----

void write_curve_csv(const std::vector<IterationStats>& curve,
                     const std::string& path, const std::string& header_comment);
std::vector<IterationStats> read_curve_csv(const std::string& path);

void write_rollout_csv(const RolloutResult& rollout, double dt,
                       const std::string& path);

void write_manifest(const ExperimentFile& file, const RewardConfig& reward,
                    const std::vector<RunRecord>& records,
                    const std::vector<std::string>& record_files,
                    const std::string& path);

void write_aggregate_csv(const std::vector<GroupSummary>& groups,
                         const std::string& path, const std::string& hash);
std::vector<GroupSummary> read_aggregate_csv(const std::string& path);

void write_summary_csv(const std::vector<GroupSummary>& groups,
                       const std::string& path, const std::string& hash);

/// Mean +/- std learning-curve chart for one dataset.
void write_curves_svg(const std::vector<GroupSummary>& groups,
                      DatasetVariant dataset, const std::string& path);

/// Record file name: <mode>_k<k>_<target>_s<seed>.csv
std::string record_file_name(const RunRecord& record);

/// Full run subcommand: dataset, calibration, matrix, outputs.
/// Returns the written manifest path.
std::string run_experiment_file(const ExperimentFile& file, int jobs);

}  // namespace skilltx

#endif  // SKILLTX_HARNESS_HPP
