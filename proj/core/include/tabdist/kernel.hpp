#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace tabdist {

enum class KernelKind { rbf, linear, polynomial };

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double bandwidth = 1.0;  // rbf: k(x,x') = exp(-|x-x'|^2 / (2 h^2))
  int degree = 2;          // polynomial: (<x,x'> + offset)^degree
  double offset = 1.0;

  static KernelSpec rbf(double h) { return {KernelKind::rbf, h, 2, 1.0}; }
  static KernelSpec linear() { return {KernelKind::linear, 1.0, 2, 1.0}; }
  static KernelSpec polynomial(int degree, double offset) {
    return {KernelKind::polynomial, 1.0, degree, offset};
  }
};

std::string kernel_kind_name(KernelKind k);
KernelKind kernel_kind_from_name(const std::string& name);
void validate(const KernelSpec& spec);

// Entry (i,j) = k(A_i, B_j). Identical rows give k = 1 exactly for rbf.
Eigen::MatrixXd gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const KernelSpec& spec);

// Median of pairwise Euclidean distances. All n(n-1)/2 pairs are enumerated
// when that count is <= 1e6; otherwise 1e6 seeded random pairs are sampled.
double median_bandwidth(const Eigen::MatrixXd& X, std::uint64_t seed);

struct KrrModel {
  Eigen::MatrixXd support_points;   // m x D
  Eigen::VectorXd support_labels;   // m
  Eigen::VectorXd dual_coefficients;
  double ridge = 1e-6;              // effective lambda (after any jitter retry)
  KernelSpec kernel;
};

// Solves (K_ss + lambda*m*I) dual = y_s by Cholesky; retries once with
// +10*lambda*m diagonal jitter, then fails with condition diagnostics.
KrrModel krr_fit(const Eigen::MatrixXd& X_s, const Eigen::VectorXd& y_s, double lambda,
                 const KernelSpec& spec);

// Z = gram(X_t, support) * dual.
Eigen::VectorXd krr_predict(const KrrModel& model, const Eigen::MatrixXd& X_t);

struct KrrGradients {
  Eigen::MatrixXd d_support_points;  // m x D
  Eigen::VectorXd d_support_labels;  // m
};

// Reverse-mode gradients of Z = K_ts (K_ss + lambda m I)^-1 y_s composed
// with upstream dL/dZ. Both the K_ts and K_ss dependence on X_s are chained.
KrrGradients krr_backward(const Eigen::MatrixXd& X_s, const Eigen::VectorXd& y_s,
                          const Eigen::MatrixXd& X_t, double lambda,
                          const KernelSpec& spec, const Eigen::VectorXd& upstream);

}  // namespace tabdist
