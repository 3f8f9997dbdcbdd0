#include "tabdist/pca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "tabdist/common.hpp"
#include "tabdist/csv.hpp"

namespace tabdist {

PcaModel pca_fit(const Eigen::MatrixXd& X, Eigen::Index k) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n < 2) {
    throw DataError("pca_fit needs at least 2 rows");
  }
  if (k < 1 || k > std::min(n - 1, d)) {
    throw ConfigError("pca_fit: k must lie in [1, min(n-1, D)]");
  }

  PcaModel model;
  model.mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1);
  if (!(cov.trace() > 0.0)) {
    throw NumericError("pca_fit: zero total variance (all rows identical)");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw NumericError("pca_fit: eigendecomposition failed");
  }

  // Eigen returns ascending eigenvalues; take the top k in descending order.
  model.components.resize(k, d);
  model.explained_variance.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index src = d - 1 - i;
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index arg_max = 0;
    v.cwiseAbs().maxCoeff(&arg_max);
    if (v[arg_max] < 0.0) v = -v;
    model.components.row(i) = v.transpose();
    model.explained_variance[i] = std::max(solver.eigenvalues()[src], 0.0);
  }
  return model;
}

Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.mean.size()) {
    throw DataError("project: feature width mismatch");
  }
  return (X.rowwise() - model.mean.transpose()) * model.components.transpose();
}

std::vector<ProjectionRow> projection_report(
    const Dataset& original,
    const std::vector<std::pair<std::string, SyntheticSet>>& coresets) {
  for (const auto& [label, coreset] : coresets) {
    if (coreset.cols() != original.cols()) {
      throw DataError("projection_report: coreset '" + label +
                      "' width disagrees with the original dataset");
    }
  }
  const PcaModel model = pca_fit(original.features, 2);

  std::vector<ProjectionRow> rows;
  const Eigen::MatrixXd orig = project(model, original.features);
  rows.reserve(static_cast<std::size_t>(orig.rows()));
  for (Eigen::Index i = 0; i < orig.rows(); ++i) {
    rows.push_back({"original", orig(i, 0), orig(i, 1), original.labels[i]});
  }
  for (const auto& [label, coreset] : coresets) {
    const Eigen::MatrixXd proj = project(model, coreset.points);
    for (Eigen::Index i = 0; i < proj.rows(); ++i) {
      rows.push_back({label, proj(i, 0), proj(i, 1), coreset.seed_class[i]});
    }
  }
  return rows;
}

void write_projection_csv(const std::vector<ProjectionRow>& rows,
                          const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> cells;
  cells.reserve(rows.size());
  for (const auto& r : rows) {
    cells.push_back(
        {r.source, format_double(r.pc1), format_double(r.pc2), std::to_string(r.cls)});
  }
  write_csv(path, {"source", "pc1", "pc2", "class"}, cells);
}

}  // namespace tabdist
