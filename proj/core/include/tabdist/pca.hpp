#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tabdist/dataset.hpp"
#include "tabdist/distill.hpp"

namespace tabdist {

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;          // k x D, orthonormal rows
  Eigen::VectorXd explained_variance;  // length k, nonincreasing
};

// Top-k eigenpairs of the sample covariance (symmetric eigendecomposition).
// Sign convention: each component's largest-magnitude coordinate is positive.
// Throws ConfigError for k out of [1, min(n-1, D)], NumericError on zero
// total variance.
PcaModel pca_fit(const Eigen::MatrixXd& X, Eigen::Index k);

// (X - mean) * components^T. Throws DataError on width mismatch.
Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& X);

struct ProjectionRow {
  std::string source;
  double pc1 = 0.0;
  double pc2 = 0.0;
  int cls = 0;
};

// 2-D projections of the original dataset and each coreset in a basis fit on
// the original data only. Row order: original block, then coresets in input
// order.
std::vector<ProjectionRow> projection_report(
    const Dataset& original,
    const std::vector<std::pair<std::string, SyntheticSet>>& coresets);

// Columns: source, pc1, pc2, class.
void write_projection_csv(const std::vector<ProjectionRow>& rows,
                          const std::filesystem::path& path);

}  // namespace tabdist
