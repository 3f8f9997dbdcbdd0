#include "tabdist/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "tabdist/common.hpp"
#include "tabdist/objectives.hpp"

namespace tabdist {

std::string classifier_kind_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::krr: return "krr";
    case ClassifierKind::logreg: return "logreg";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::cart: return "cart";
    case ClassifierKind::forest: return "forest";
  }
  return "?";
}

ClassifierKind classifier_kind_from_name(const std::string& name) {
  if (name == "krr") return ClassifierKind::krr;
  if (name == "logreg") return ClassifierKind::logreg;
  if (name == "knn") return ClassifierKind::knn;
  if (name == "cart") return ClassifierKind::cart;
  if (name == "forest") return ClassifierKind::forest;
  throw ConfigError("unknown classifier kind: " + name);
}

ClassifierSpec ClassifierSpec::of(ClassifierKind kind) {
  ClassifierSpec s;
  s.kind = kind;
  return s;
}

void validate(const ClassifierSpec& spec) {
  switch (spec.kind) {
    case ClassifierKind::krr:
      if (!(spec.krr_lambda > 0.0)) throw ConfigError("krr lambda must be positive");
      break;
    case ClassifierKind::logreg:
      if (!(spec.logreg_l2 >= 0.0)) throw ConfigError("logreg l2 must be >= 0");
      if (spec.logreg_iterations < 1) throw ConfigError("logreg iterations must be >= 1");
      break;
    case ClassifierKind::knn:
      if (spec.knn_k < 1) throw ConfigError("knn k must be >= 1");
      break;
    case ClassifierKind::cart:
      if (spec.cart_max_depth < 0) throw ConfigError("cart max depth must be >= 0");
      if (spec.cart_min_leaf < 1) throw ConfigError("cart min leaf must be >= 1");
      break;
    case ClassifierKind::forest:
      if (spec.forest_trees < 1) throw ConfigError("forest needs >= 1 tree");
      if (spec.forest_feature_fraction > 1.0) {
        throw ConfigError("forest feature fraction must be <= 1 (<= 0 = sqrt rule)");
      }
      if (spec.forest_max_depth < 0) throw ConfigError("forest max depth must be >= 0");
      if (spec.forest_min_leaf < 1) throw ConfigError("forest min leaf must be >= 1");
      break;
  }
}

namespace {

void check_width(Eigen::Index expect, const Eigen::MatrixXd& X) {
  if (X.cols() != expect) {
    throw DataError("predict_proba: feature width mismatch");
  }
}

void check_two_classes(const Eigen::VectorXi& y) {
  const auto pos = (y.array() == 1).count();
  if (pos == 0 || pos == y.size()) {
    throw DataError("classifier training needs both classes present");
  }
}

// ---- kernel ridge with a sigmoid link ----

class KrrClassifier final : public Classifier {
 public:
  KrrClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& targets) {
    KernelSpec kernel = spec.krr_kernel;
    if (kernel.kind == KernelKind::rbf && !(kernel.bandwidth > 0.0)) {
      kernel.bandwidth = median_bandwidth(X, spec.seed);
    }
    model_ = krr_fit(X, targets, spec.krr_lambda, kernel);
  }

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(feature_width(), X);
    return shifted_sigmoid(krr_predict(model_, X), 0.0);
  }

  Eigen::Index feature_width() const override { return model_.support_points.cols(); }

 private:
  KrrModel model_;
};

// ---- logistic regression by plain gradient descent ----

class LogRegClassifier final : public Classifier {
 public:
  LogRegClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                   const Eigen::VectorXi& y)
      : w_(Eigen::VectorXd::Zero(X.cols())) {
    const auto n = static_cast<double>(X.rows());
    const Eigen::VectorXd yd = y.cast<double>();
    for (int t = 1; t <= spec.logreg_iterations; ++t) {
      const Eigen::VectorXd p = shifted_sigmoid(X * w_ + Eigen::VectorXd::Constant(X.rows(), b_), 0.0);
      const Eigen::VectorXd r = p - yd;
      const Eigen::VectorXd gw = X.transpose() * r / n + spec.logreg_l2 * w_;
      const double gb = r.sum() / n;
      const double lr = 0.1 / std::sqrt(static_cast<double>(t));
      w_ -= lr * gw;
      b_ -= lr * gb;
      if (std::max(gw.cwiseAbs().maxCoeff(), std::abs(gb)) < 1e-6) break;
    }
  }

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(feature_width(), X);
    return shifted_sigmoid(X * w_ + Eigen::VectorXd::Constant(X.rows(), b_), 0.0);
  }

  Eigen::Index feature_width() const override { return w_.size(); }

 private:
  Eigen::VectorXd w_;
  double b_ = 0.0;
};

// ---- distance-weighted k nearest neighbors ----

class KnnClassifier final : public Classifier {
 public:
  KnnClassifier(const ClassifierSpec& spec, Eigen::MatrixXd X, Eigen::VectorXi y)
      : X_(std::move(X)), y_(std::move(y)), k_(std::min<Eigen::Index>(spec.knn_k, X_.rows())) {}

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(feature_width(), X);
    Eigen::VectorXd out(X.rows());
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(X_.rows()));
    for (Eigen::Index q = 0; q < X.rows(); ++q) {
      for (Eigen::Index i = 0; i < X_.rows(); ++i) {
        dist[static_cast<std::size_t>(i)] = {(X_.row(i) - X.row(q)).norm(), i};
      }
      std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());
      double wsum = 0.0, psum = 0.0;
      for (Eigen::Index j = 0; j < k_; ++j) {
        const double w = 1.0 / (dist[static_cast<std::size_t>(j)].first + 1e-12);
        wsum += w;
        psum += w * (y_[dist[static_cast<std::size_t>(j)].second] == 1 ? 1.0 : 0.0);
      }
      out[q] = psum / wsum;
    }
    return out;
  }

  Eigen::Index feature_width() const override { return X_.cols(); }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXi y_;
  Eigen::Index k_;
};

// ---- Gini CART, shared by cart and forest ----

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double prob = 0.0;
};

struct TreeParams {
  int max_depth = 6;
  int min_leaf = 1;
  Eigen::Index features_per_split = 0;  // == D disables sampling
};

double gini(double pos, double total) {
  if (total <= 0.0) return 0.0;
  const double p = pos / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

class DecisionTree {
 public:
  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
           std::vector<Eigen::Index> rows, const TreeParams& params,
           std::mt19937_64* rng) {
    nodes_.clear();
    build(X, y, std::move(rows), params, rng, 0);
  }

  double predict_one(const Eigen::RowVectorXd& x) const {
    int at = 0;
    while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
      const auto& nd = nodes_[static_cast<std::size_t>(at)];
      at = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(at)].prob;
  }

 private:
  int build(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
            std::vector<Eigen::Index> rows, const TreeParams& params,
            std::mt19937_64* rng, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    const double total = static_cast<double>(rows.size());
    double pos = 0.0;
    for (auto r : rows) pos += y[r] == 1 ? 1.0 : 0.0;
    nodes_[static_cast<std::size_t>(id)].prob = pos / total;

    const bool pure = pos == 0.0 || pos == total;
    if (depth >= params.max_depth || pure ||
        static_cast<int>(rows.size()) < 2 * params.min_leaf) {
      return id;
    }

    const auto d = X.cols();
    std::vector<Eigen::Index> feats(static_cast<std::size_t>(d));
    std::iota(feats.begin(), feats.end(), Eigen::Index{0});
    // Random subspace: only draws from the RNG when a strict subset is
    // requested, so feature fraction 1.0 reproduces cart bit for bit.
    if (rng != nullptr && params.features_per_split < d) {
      for (Eigen::Index i = 0; i < params.features_per_split; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, d - 1);
        std::swap(feats[static_cast<std::size_t>(i)],
                  feats[static_cast<std::size_t>(pick(*rng))]);
      }
      feats.resize(static_cast<std::size_t>(params.features_per_split));
    }

    const double parent = gini(pos, total);
    double best_gain = -1.0;
    Eigen::Index best_feat = -1;
    double best_thr = 0.0;

    std::vector<std::pair<double, int>> vals;
    vals.reserve(rows.size());
    for (auto f : feats) {
      vals.clear();
      for (auto r : rows) vals.emplace_back(X(r, f), y[r]);
      std::sort(vals.begin(), vals.end());

      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left_pos += vals[i].second == 1 ? 1.0 : 0.0;
        if (vals[i].first == vals[i + 1].first) continue;  // no boundary here
        const double nl = static_cast<double>(i + 1);
        const double nr = total - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        const double child =
            (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / total;
        const double gain = parent - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_feat = f;
          best_thr = 0.5 * (vals[i].first + vals[i + 1].first);
        }
      }
    }

    if (best_feat < 0 || best_gain < 0.0) {
      return id;
    }

    std::vector<Eigen::Index> lrows, rrows;
    for (auto r : rows) (X(r, best_feat) <= best_thr ? lrows : rrows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    nodes_[static_cast<std::size_t>(id)].feature = static_cast<int>(best_feat);
    nodes_[static_cast<std::size_t>(id)].threshold = best_thr;
    const int l = build(X, y, std::move(lrows), params, rng, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    const int r = build(X, y, std::move(rrows), params, rng, depth + 1);
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  std::vector<TreeNode> nodes_;
};

class CartClassifier final : public Classifier {
 public:
  CartClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                 const Eigen::VectorXi& y)
      : width_(X.cols()) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(X.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    TreeParams params{spec.cart_max_depth, spec.cart_min_leaf, X.cols()};
    tree_.fit(X, y, std::move(rows), params, nullptr);
  }

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(width_, X);
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = tree_.predict_one(X.row(i));
    return out;
  }

  Eigen::Index feature_width() const override { return width_; }

 private:
  Eigen::Index width_;
  DecisionTree tree_;
};

class ForestClassifier final : public Classifier {
 public:
  ForestClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& X,
                   const Eigen::VectorXi& y)
      : width_(X.cols()) {
    const auto d = X.cols();
    const auto n = X.rows();
    Eigen::Index per_split;
    if (spec.forest_feature_fraction > 0.0) {
      per_split = std::clamp<Eigen::Index>(
          static_cast<Eigen::Index>(std::llround(spec.forest_feature_fraction *
                                                 static_cast<double>(d))),
          1, d);
    } else {
      per_split = std::clamp<Eigen::Index>(
          static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(d)))), 1, d);
    }
    TreeParams params{spec.forest_max_depth, spec.forest_min_leaf, per_split};

    trees_.resize(static_cast<std::size_t>(spec.forest_trees));
    for (int t = 0; t < spec.forest_trees; ++t) {
      auto rng = make_rng(mix_seed(spec.seed, static_cast<std::uint64_t>(t)));
      std::vector<Eigen::Index> rows;
      rows.reserve(static_cast<std::size_t>(n));
      if (spec.forest_bootstrap) {
        std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
        for (Eigen::Index i = 0; i < n; ++i) rows.push_back(pick(rng));
      } else {
        rows.resize(static_cast<std::size_t>(n));
        std::iota(rows.begin(), rows.end(), Eigen::Index{0});
      }
      trees_[static_cast<std::size_t>(t)].fit(X, y, std::move(rows), params, &rng);
    }
  }

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const override {
    check_width(width_, X);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (const auto& tree : trees_) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] += tree.predict_one(X.row(i));
    }
    return out / static_cast<double>(trees_.size());
  }

  Eigen::Index feature_width() const override { return width_; }

 private:
  Eigen::Index width_;
  std::vector<DecisionTree> trees_;
};

std::unique_ptr<Classifier> train_on_matrix(const ClassifierSpec& spec,
                                            const Eigen::MatrixXd& X,
                                            const Eigen::VectorXi& y,
                                            const Eigen::VectorXd* krr_targets) {
  validate(spec);
  if (X.rows() < 1 || X.rows() != y.size()) {
    throw DataError("classifier training data is empty or inconsistent");
  }
  check_two_classes(y);
  switch (spec.kind) {
    case ClassifierKind::krr: {
      Eigen::VectorXd targets(y.size());
      if (krr_targets != nullptr && spec.krr_regress_targets) {
        targets = *krr_targets;
      } else {
        for (Eigen::Index i = 0; i < y.size(); ++i) targets[i] = y[i] == 1 ? 1.0 : -1.0;
      }
      return std::make_unique<KrrClassifier>(spec, X, targets);
    }
    case ClassifierKind::logreg:
      return std::make_unique<LogRegClassifier>(spec, X, y);
    case ClassifierKind::knn:
      return std::make_unique<KnnClassifier>(spec, X, y);
    case ClassifierKind::cart:
      return std::make_unique<CartClassifier>(spec, X, y);
    case ClassifierKind::forest:
      return std::make_unique<ForestClassifier>(spec, X, y);
  }
  throw ConfigError("unreachable classifier kind");
}

}  // namespace

std::unique_ptr<Classifier> train_classifier(const ClassifierSpec& spec,
                                             const Eigen::MatrixXd& X,
                                             const Eigen::VectorXi& y) {
  return train_on_matrix(spec, X, y, nullptr);
}

std::unique_ptr<Classifier> train_classifier(const ClassifierSpec& spec,
                                             const Dataset& train) {
  return train_on_matrix(spec, train.features, train.labels, nullptr);
}

std::unique_ptr<Classifier> train_classifier(const ClassifierSpec& spec,
                                             const SyntheticSet& train) {
  return train_on_matrix(spec, train.points, train.seed_class, &train.targets);
}

}  // namespace tabdist
