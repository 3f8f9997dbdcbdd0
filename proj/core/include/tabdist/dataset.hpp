#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tabdist {

// Per-column affine transform recorded by standardize(). `stddev` is the
// sample standard deviation (divide by N-1); zero-variance columns keep
// stddev 0 and are flagged, with an effective divisor of 1.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::vector<char> zero_variance;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& standardized) const;
  Eigen::Index dim() const { return mean.size(); }
};

// Binary-labeled tabular dataset. Label 1 = positive (defaulter).
// Immutable by convention: every operation returns a new value.
struct Dataset {
  Eigen::MatrixXd features;  // N x D
  Eigen::VectorXi labels;    // N, each 0 or 1
  std::vector<std::string> feature_names;
  std::optional<Standardization> standardization;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  Eigen::Index positives() const { return (labels.array() == 1).count(); }
  Eigen::Index negatives() const { return (labels.array() == 0).count(); }
};

struct SplitSpec {
  double test_fraction = 0.2;
  bool stratified = true;
  std::uint64_t seed = 0;
};

// Throws DataError if any type invariant is violated (finiteness, binary
// labels, both classes present, recorded standardization consistent).
void validate(const Dataset& ds);

// Loads a CSV with a header row; rows containing any empty or unparseable
// cell are dropped; label cells equal to positive_value map to 1, all
// others to 0.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::string& positive_value);

// Writes the dataset back out as CSV (same schema) plus a JSON sidecar
// (feature names, standardization, class counts, imbalance ratio) at
// csv_path with extension replaced by .json.
void save_csv(const Dataset& ds, const std::filesystem::path& csv_path,
              const std::string& label_column = "label");

// Majority count / minority count, always >= 1.
double imbalance_ratio(const Dataset& ds);

// Shifts/scales every column to mean 0, sample stddev 1; constant columns
// become all-zero and are flagged. Records the transform.
Dataset standardize(const Dataset& ds);

// Deterministic (per seed) partition; |test| = round(N * test_fraction).
// Stratified mode keeps each class's test share within one sample of
// test_fraction.
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

// m rows without replacement; stratified mode draws
// max(1, round(m * N_pos / N)) positives.
Dataset random_subset(const Dataset& ds, int m, bool stratified, std::uint64_t seed);

// Two unit-covariance Gaussian clusters in d dimensions, class means
// `separation` apart along a seeded random unit direction;
// positives = max(1, round(n / (1 + ir))). Rows are shuffled.
Dataset gen_synthetic(int n, int d, double ir, double separation, std::uint64_t seed);

// Shared stratified draw used by both random_subset and the distiller's
// subsample init, so equal seeds produce equal row selections.
std::vector<Eigen::Index> stratified_sample_indices(const Eigen::VectorXi& labels,
                                                    Eigen::Index n_pos, Eigen::Index n_neg,
                                                    std::uint64_t seed);

}  // namespace tabdist
