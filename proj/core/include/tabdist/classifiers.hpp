#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>

#include "tabdist/dataset.hpp"
#include "tabdist/distill.hpp"
#include "tabdist/kernel.hpp"

namespace tabdist {

enum class ClassifierKind { krr, logreg, knn, cart, forest };

std::string classifier_kind_name(ClassifierKind k);
ClassifierKind classifier_kind_from_name(const std::string& name);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::krr;

  // krr: sigmoid link over KRR scores; rbf bandwidth <= 0 resolves to the
  // median heuristic on the training features.
  double krr_lambda = 1e-3;
  KernelSpec krr_kernel = KernelSpec::rbf(0.0);
  bool krr_regress_targets = false;  // fit y_s instead of +-1 on coresets

  // logreg: full-batch gradient descent, lr 0.1/sqrt(t).
  double logreg_l2 = 1e-4;
  int logreg_iterations = 5000;

  int knn_k = 5;

  int cart_max_depth = 6;
  int cart_min_leaf = 1;

  int forest_trees = 100;
  double forest_feature_fraction = 0.0;  // <= 0 resolves to sqrt(D)/D
  int forest_max_depth = 12;
  int forest_min_leaf = 1;
  bool forest_bootstrap = false;

  std::uint64_t seed = 0;

  static ClassifierSpec of(ClassifierKind kind);
};

void validate(const ClassifierSpec& spec);

class Classifier {
 public:
  virtual ~Classifier() = default;
  // Positive-class probabilities in [0,1]; throws DataError on width mismatch.
  virtual Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const = 0;
  virtual Eigen::Index feature_width() const = 0;
};

// Trains on a 0/1-labeled matrix; throws DataError when only one class is
// present. Deterministic per spec.seed.
std::unique_ptr<Classifier> train_classifier(const ClassifierSpec& spec,
                                             const Eigen::MatrixXd& X,
                                             const Eigen::VectorXi& y);

std::unique_ptr<Classifier> train_classifier(const ClassifierSpec& spec,
                                             const Dataset& train);

// Coresets train on the frozen y_class labels; a krr spec with
// krr_regress_targets set fits the learned y_s instead.
std::unique_ptr<Classifier> train_classifier(const ClassifierSpec& spec,
                                             const SyntheticSet& train);

}  // namespace tabdist
