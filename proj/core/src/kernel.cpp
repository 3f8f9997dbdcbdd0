#include "tabdist/kernel.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tabdist/common.hpp"

namespace tabdist {

std::string kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::rbf: return "rbf";
    case KernelKind::linear: return "linear";
    case KernelKind::polynomial: return "polynomial";
  }
  return "?";
}

KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "rbf") return KernelKind::rbf;
  if (name == "linear") return KernelKind::linear;
  if (name == "polynomial") return KernelKind::polynomial;
  throw ConfigError("unknown kernel kind: " + name);
}

void validate(const KernelSpec& spec) {
  if (spec.kind == KernelKind::rbf && !(spec.bandwidth > 0.0)) {
    throw ConfigError("rbf kernel needs bandwidth > 0");
  }
  if (spec.kind == KernelKind::polynomial && spec.degree < 1) {
    throw ConfigError("polynomial kernel needs degree >= 1");
  }
}

namespace {

// Squared Euclidean distances via explicit row differences: identical rows
// give exactly 0, so exp(0) = 1 exactly on the rbf diagonal.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd d2(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    d2.row(i) = (B.rowwise() - A.row(i)).rowwise().squaredNorm().transpose();
  }
  return d2;
}

Eigen::MatrixXd power_elementwise(const Eigen::MatrixXd& base, int exponent) {
  return base.array().pow(exponent).matrix();
}

struct RidgeSystem {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd K_ss;
  double effective_lambda = 0.0;
};

RidgeSystem factor_ridge_system(const Eigen::MatrixXd& X_s, double lambda,
                                const KernelSpec& spec) {
  const auto m = X_s.rows();
  RidgeSystem sys;
  sys.K_ss = gram(X_s, X_s, spec);
  const double base = lambda * static_cast<double>(m);
  Eigen::MatrixXd A = sys.K_ss + base * Eigen::MatrixXd::Identity(m, m);
  sys.llt.compute(A);
  sys.effective_lambda = lambda;
  if (sys.llt.info() != Eigen::Success || !A.allFinite()) {
    // one retry with extra jitter on near-singular systems
    A += 10.0 * base * Eigen::MatrixXd::Identity(m, m);
    sys.llt.compute(A);
    sys.effective_lambda = 11.0 * lambda;
    if (sys.llt.info() != Eigen::Success || !A.allFinite()) {
      throw NumericError(
          "kernel ridge solve failed (matrix numerically singular despite ridge): m=" +
          std::to_string(m) + ", diag range [" + format_double(A.diagonal().minCoeff()) +
          ", " + format_double(A.diagonal().maxCoeff()) + "], lambda*m=" +
          format_double(base));
    }
  }
  return sys;
}

}  // namespace

Eigen::MatrixXd gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const KernelSpec& spec) {
  if (A.cols() != B.cols()) {
    throw DataError("gram: inputs have different feature widths");
  }
  validate(spec);
  switch (spec.kind) {
    case KernelKind::rbf: {
      const double inv = 1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
      return (-inv * squared_distances(A, B).array()).exp().matrix();
    }
    case KernelKind::linear:
      return A * B.transpose();
    case KernelKind::polynomial: {
      Eigen::MatrixXd base = (A * B.transpose()).array() + spec.offset;
      return power_elementwise(base, spec.degree);
    }
  }
  throw ConfigError("unreachable kernel kind");
}

double median_bandwidth(const Eigen::MatrixXd& X, std::uint64_t seed) {
  const auto n = X.rows();
  if (n < 2) {
    throw DataError("median_bandwidth needs at least 2 rows");
  }
  constexpr std::size_t kPairBudget = 1000000;
  std::vector<double> dists;
  const std::size_t total_pairs =
      static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  if (total_pairs <= kPairBudget) {
    dists.reserve(total_pairs);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        dists.push_back((X.row(i) - X.row(j)).norm());
      }
    }
  } else {
    dists.reserve(kPairBudget);
    auto rng = make_rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    while (dists.size() < kPairBudget) {
      const auto i = pick(rng);
      const auto j = pick(rng);
      if (i == j) continue;
      dists.push_back((X.row(i) - X.row(j)).norm());
    }
  }

  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid),
                   dists.end());
  double med = dists[mid];
  if (dists.size() % 2 == 0) {
    const double lower =
        *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (lower + med);
  }
  if (!(med > 0.0)) {
    throw DataError("median pairwise distance is zero (rows effectively identical)");
  }
  return med;
}

KrrModel krr_fit(const Eigen::MatrixXd& X_s, const Eigen::VectorXd& y_s, double lambda,
                 const KernelSpec& spec) {
  if (X_s.rows() < 1 || X_s.rows() != y_s.size()) {
    throw DataError("krr_fit: support points and labels disagree");
  }
  if (!(lambda > 0.0)) {
    throw ConfigError("krr_fit: ridge lambda must be positive");
  }
  auto sys = factor_ridge_system(X_s, lambda, spec);

  KrrModel model;
  model.support_points = X_s;
  model.support_labels = y_s;
  model.dual_coefficients = sys.llt.solve(y_s);
  model.ridge = sys.effective_lambda;
  model.kernel = spec;

  const auto m = X_s.rows();
  const Eigen::MatrixXd A =
      sys.K_ss +
      sys.effective_lambda * static_cast<double>(m) * Eigen::MatrixXd::Identity(m, m);
  const double residual = (A * model.dual_coefficients - y_s).norm();
  if (!(residual <= 1e-8 * std::max(y_s.norm(), 1e-30)) && y_s.norm() > 0.0) {
    throw NumericError("kernel ridge solve residual too large: " + format_double(residual) +
                       " vs |y| = " + format_double(y_s.norm()));
  }
  return model;
}

Eigen::VectorXd krr_predict(const KrrModel& model, const Eigen::MatrixXd& X_t) {
  if (X_t.cols() != model.support_points.cols()) {
    throw DataError("krr_predict: feature width mismatch");
  }
  return gram(X_t, model.support_points, model.kernel) * model.dual_coefficients;
}

KrrGradients krr_backward(const Eigen::MatrixXd& X_s, const Eigen::VectorXd& y_s,
                          const Eigen::MatrixXd& X_t, double lambda,
                          const KernelSpec& spec, const Eigen::VectorXd& upstream) {
  if (X_t.cols() != X_s.cols() || y_s.size() != X_s.rows() ||
      upstream.size() != X_t.rows()) {
    throw DataError("krr_backward: inconsistent shapes");
  }
  auto sys = factor_ridge_system(X_s, lambda, spec);
  const Eigen::MatrixXd K_ts = gram(X_t, X_s, spec);

  const Eigen::VectorXd alpha = sys.llt.solve(y_s);            // A^-1 y_s
  const Eigen::VectorXd beta = sys.llt.solve(K_ts.transpose() * upstream);  // dL/dy_s

  // dL/dK_ts = g a^T ; dL/dK_ss = -b a^T (A symmetric). The X_s chain below
  // needs the symmetrized K_ss adjoint since s_i enters K_ss twice.
  const Eigen::MatrixXd g_ts = upstream * alpha.transpose();  // n x m
  const Eigen::MatrixXd g_ss_sym =
      -(beta * alpha.transpose() + alpha * beta.transpose());  // m x m

  KrrGradients out;
  out.d_support_labels = beta;
  out.d_support_points = Eigen::MatrixXd::Zero(X_s.rows(), X_s.cols());

  switch (spec.kind) {
    case KernelKind::rbf: {
      const double inv_h2 = 1.0 / (spec.bandwidth * spec.bandwidth);
      // d k(x, s)/d s = k(x, s) (x - s)/h^2
      const Eigen::MatrixXd M_ts = g_ts.cwiseProduct(K_ts);  // n x m
      out.d_support_points +=
          inv_h2 * (M_ts.transpose() * X_t -
                    M_ts.colwise().sum().transpose().asDiagonal() * X_s);
      const Eigen::MatrixXd W = g_ss_sym.cwiseProduct(sys.K_ss);  // m x m
      out.d_support_points +=
          inv_h2 * (W * X_s - W.rowwise().sum().asDiagonal() * X_s);
      break;
    }
    case KernelKind::linear: {
      out.d_support_points += g_ts.transpose() * X_t;
      out.d_support_points += g_ss_sym * X_s;
      break;
    }
    case KernelKind::polynomial: {
      const double p = static_cast<double>(spec.degree);
      Eigen::MatrixXd dot_ts = (X_t * X_s.transpose()).array() + spec.offset;
      Eigen::MatrixXd dot_ss = (X_s * X_s.transpose()).array() + spec.offset;
      const Eigen::MatrixXd P_ts = p * power_elementwise(dot_ts, spec.degree - 1).array();
      const Eigen::MatrixXd P_ss = p * power_elementwise(dot_ss, spec.degree - 1).array();
      out.d_support_points += (g_ts.cwiseProduct(P_ts)).transpose() * X_t;
      out.d_support_points += g_ss_sym.cwiseProduct(P_ss) * X_s;
      break;
    }
  }
  return out;
}

}  // namespace tabdist
