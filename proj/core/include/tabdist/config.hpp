#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tabdist/classifiers.hpp"
#include "tabdist/dataset.hpp"
#include "tabdist/distill.hpp"

namespace tabdist {

// Parsed run configuration: flat `key = value` text with one section per
// module. Unknown sections or keys are rejected.
struct RunConfig {
  // [data] — a set path selects CSV ingestion, otherwise the synthetic
  // generator parameters apply.
  std::string data_path;
  std::string label_column = "label";
  std::string positive_value = "1";
  int synthetic_n = 2000;
  int synthetic_d = 8;
  double synthetic_ir = 5.0;
  double synthetic_sep = 2.0;

  // [split]
  double test_fraction = 0.2;
  bool stratified = true;

  // [distill], [objective], [kernel]
  DistillConfig distill;
  bool objective_coe_auto = true;      // coe = fraction of train negatives
  bool objective_alpha_w_auto = true;  // alpha_w = same as coe
  bool objective_ir_auto = true;       // ir = train imbalance ratio
  bool coe_positive_fraction = false;  // ablation: fraction of positives

  // [eval]
  std::vector<ObjectiveKind> eval_objectives{ObjectiveKind::mse};
  std::vector<Eigen::Index> eval_sizes{10, 20, 30, 50, 100, 200, 300, 500, 700, 900};
  std::vector<std::uint64_t> eval_seeds;  // empty -> {master seed}
  std::vector<ClassifierKind> eval_classifiers{ClassifierKind::krr};
  bool include_random_baseline = true;
  bool include_full_baseline = true;
  double eval_threshold = 0.5;
  Eigen::Index project_size = 0;  // > 0: emit a projection at this size
  ClassifierSpec classifier_defaults;

  // [calibrate]
  std::vector<double> grid_alpha{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<double> grid_beta{-1.0, -0.5, 0.0, 0.5, 1.0};

  // [project]
  std::vector<std::string> project_coresets;

  // [output]
  std::string out_dir = "run";

  // master seed ([distill] seed, overridable by --seed)
  std::uint64_t seed = 0;
};

RunConfig parse_run_config(const std::filesystem::path& path);
RunConfig parse_run_config_text(const std::string& text, const std::string& origin);

// Fill the auto objective parameters (coe, alpha_w, ir) from the training
// class balance and resolve the distill seed; returns the per-run config.
DistillConfig resolve_distill(const RunConfig& cfg, const Dataset& train);

// Derived seed for the train/test split, so changing distillation settings
// never perturbs the partition.
std::uint64_t split_seed(const RunConfig& cfg);

}  // namespace tabdist
