#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tabdist/classifiers.hpp"
#include "tabdist/dataset.hpp"
#include "tabdist/distill.hpp"

namespace tabdist {

struct EvalReport {
  double auc = 0.0;
  double f1 = 0.0;
  double balanced_accuracy = 0.0;
  double minority_recall = 0.0;
  Eigen::Index n_train = 0;
  Eigen::Index n_test = 0;
  double threshold = 0.5;
};

// Mann-Whitney rank AUC: P(score+ > score-) + 0.5 P(tie). Throws DataError
// unless both classes are present.
double auc_score(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels);

// Scores test with the model; classification metrics use
// `score >= threshold => positive`. The minority class is the positive one.
EvalReport evaluate(const Classifier& model, const Dataset& test, double threshold = 0.5,
                    Eigen::Index n_train = 0);

struct SweepPlan {
  std::vector<ObjectiveSpec> objectives;
  std::vector<Eigen::Index> sizes;
  std::vector<ClassifierSpec> classifiers;
  std::vector<std::uint64_t> seeds;
  bool include_random_baseline = false;
  bool include_full_baseline = false;
  DistillConfig base;  // template; m, objective, seed filled per cell
  std::string dataset_id = "dataset";
  double threshold = 0.5;
  int jobs = 1;
};

struct SweepRow {
  std::string dataset;
  std::string source;     // original | random_subset | distilled
  std::string objective;  // "none" on baseline rows
  Eigen::Index m = 0;
  std::string classifier;
  std::uint64_t seed = 0;
  EvalReport report;
  std::string status = "ok";  // error text on failed cells
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// The full experiment grid. Distilled cells and random-baseline cells with
// the same (size, seed) share a derived cell seed, so a 0-epoch subsample
// run reproduces the random baseline. Per-cell failures are recorded in the
// status column, never dropped. Deterministic for fixed inputs, independent
// of the jobs count.
SweepResult sweep(const Dataset& train, const Dataset& test, const SweepPlan& plan);

// Fixed column order: dataset, source, objective, m, classifier, seed, auc,
// f1, balanced_accuracy, minority_recall, status. Metric cells are empty on
// failed rows.
void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path);
void write_sweep_json(const SweepResult& result, const std::filesystem::path& path);

// Seed shared by a distilled cell and its random baseline.
std::uint64_t sweep_cell_seed(std::uint64_t seed, std::size_t size_index);

}  // namespace tabdist
