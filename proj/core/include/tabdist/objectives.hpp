#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace tabdist {

enum class ObjectiveKind { mse, ce, wce, focal, asig };

std::string objective_kind_name(ObjectiveKind k);
ObjectiveKind objective_kind_from_name(const std::string& name);

// Parameters for the five distillation objectives. Only the fields relevant
// to `kind` are consulted: gamma (focal, asig), coe (wce), alpha_w / alpha_g /
// beta_g / ir (asig).
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::mse;
  double gamma = 2.0;
  double coe = 0.5;
  double alpha_w = 0.5;
  double alpha_g = 1.0;
  double beta_g = 0.0;
  double ir = 1.0;

  static ObjectiveSpec mse();
  static ObjectiveSpec ce();
  static ObjectiveSpec wce(double coe);
  static ObjectiveSpec focal(double gamma);
  static ObjectiveSpec asig(double gamma, double alpha_w, double alpha_g,
                            double beta_g, double ir);
};

// Throws ConfigError if the parameters needed by spec.kind are out of range.
void validate(const ObjectiveSpec& spec);

// Class-rebalancing weight for wce/asig: fraction of negatives, which
// up-weights the rare positive term. The positive-fraction variant is kept
// for ablation.
double rebalancing_coe(std::int64_t n_pos, std::int64_t n_neg,
                       bool positive_fraction = false);

// G(ir, alpha, beta) = alpha * ln(ir) + beta. Throws ConfigError if ir <= 0.
double g_shift(double ir, double alpha_g, double beta_g);

// Elementwise p_j = sigmoid(Z_j - G), computed in the log1p-stable form and
// clamped into the open interval (0, 1) so downstream logs stay finite even
// for |Z - G| in the hundreds.
Eigen::VectorXd shifted_sigmoid(const Eigen::VectorXd& Z, double G);

struct LossResult {
  double loss = 0.0;
  Eigen::VectorXd grad;  // dL/dZ, same length as Z
};

// Mean loss over the batch and its gradient in the raw scores Z. y_t holds
// 0/1 class labels; y_enc holds the +-1 encoding (consulted by mse only).
// Probabilities are clamped to [1e-12, 1 - 1e-12] before logs; the gradient
// follows the unclamped objective so saturated samples keep a learning
// signal.
LossResult loss_and_grad(const ObjectiveSpec& spec, const Eigen::VectorXd& Z,
                         const Eigen::VectorXi& y_t, const Eigen::VectorXd& y_enc);

}  // namespace tabdist
