// Acceptance harness: exercises the ten shipping criteria end to end and
// prints one verdict line per criterion. Exit status is the failure count.
#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "support.hpp"
#include "tabdist/calibrate.hpp"
#include "tabdist/classifiers.hpp"
#include "tabdist/common.hpp"
#include "tabdist/config.hpp"
#include "tabdist/dataset.hpp"
#include "tabdist/distill.hpp"
#include "tabdist/evaluate.hpp"
#include "tabdist/kernel.hpp"
#include "tabdist/objectives.hpp"
#include "tabdist/pca.hpp"

namespace fs = std::filesystem;
using namespace tabdist;

namespace {

struct Verdict {
  bool ok = true;
  bool skipped = false;
  std::string detail;
};

void report(int index, const char* label, const Verdict& v) {
  const char* status = v.skipped ? "SKIP" : (v.ok ? "PASS" : "FAIL");
  std::printf("[%2d] %-4s %s%s%s\n", index, status, label,
              v.detail.empty() ? "" : " - ", v.detail.c_str());
  std::fflush(stdout);
}

double flat_rel_err(const KrrGradients& got, const Eigen::VectorXd& fd) {
  Eigen::VectorXd flat(got.d_support_points.size() + got.d_support_labels.size());
  Eigen::Index at = 0;
  for (Eigen::Index i = 0; i < got.d_support_points.rows(); ++i)
    for (Eigen::Index j = 0; j < got.d_support_points.cols(); ++j)
      flat(at++) = got.d_support_points(i, j);
  flat.tail(got.d_support_labels.size()) = got.d_support_labels;
  return testsup::rel_err(flat, fd);
}

// ---- criterion 1: composite gradient fidelity ------------------------------

Verdict criterion_gradients() {
  const std::vector<ObjectiveSpec> objectives = {
      ObjectiveSpec::mse(), ObjectiveSpec::ce(), ObjectiveSpec::wce(0.7),
      ObjectiveSpec::focal(2.0), ObjectiveSpec::asig(2.0, 0.75, 1.0, 0.0, 6.0)};
  const Eigen::Index m = 8, d = 3, n = 16;
  const double lambda = 1e-4;
  const KernelSpec spec = KernelSpec::rbf(1.2);

  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    auto rng = make_rng(900 + static_cast<std::uint64_t>(rep));
    const Eigen::MatrixXd X_t = testsup::random_matrix(rng, n, d);
    const Eigen::VectorXi y_t = testsup::random_labels(rng, n);
    Eigen::VectorXd y_enc(n);
    for (Eigen::Index i = 0; i < n; ++i) y_enc(i) = y_t(i) == 1 ? 1.0 : -1.0;
    const Eigen::MatrixXd X_s = testsup::random_matrix(rng, m, d);
    const Eigen::VectorXd y_s = testsup::random_vector(rng, m);

    for (const auto& objective : objectives) {
      const Eigen::VectorXd z = krr_predict(krr_fit(X_s, y_s, lambda, spec), X_t);
      const LossResult lr = loss_and_grad(objective, z, y_t, y_enc);
      const KrrGradients kg = krr_backward(X_s, y_s, X_t, lambda, spec, lr.grad);

      Eigen::VectorXd theta(m * d + m);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < d; ++j) theta(i * d + j) = X_s(i, j);
      theta.tail(m) = y_s;
      auto batch_loss = [&](const Eigen::VectorXd& t) {
        Eigen::MatrixXd xs(m, d);
        for (Eigen::Index i = 0; i < m; ++i)
          for (Eigen::Index j = 0; j < d; ++j) xs(i, j) = t(i * d + j);
        const Eigen::VectorXd ys = t.tail(m);
        const Eigen::VectorXd zz = krr_predict(krr_fit(xs, ys, lambda, spec), X_t);
        return loss_and_grad(objective, zz, y_t, y_enc).loss;
      };
      const Eigen::VectorXd fd = testsup::fd_gradient(batch_loss, theta, 1e-5);
      worst = std::max(worst, flat_rel_err(kg, fd));
    }
  }
  return {worst < 1e-4, false,
          "max relative error " + format_double(worst) + " over 20x5 instances"};
}

// ---- criterion 2: loss identities ------------------------------------------

Verdict criterion_identities() {
  auto rng = make_rng(41);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 16;
    const Eigen::VectorXd z = testsup::random_vector(rng, n, 2.5);
    const Eigen::VectorXi y = testsup::random_labels(rng, n);
    Eigen::VectorXd enc(n);
    for (Eigen::Index i = 0; i < n; ++i) enc(i) = y(i) == 1 ? 1.0 : -1.0;

    const LossResult ce = loss_and_grad(ObjectiveSpec::ce(), z, y, enc);
    const LossResult focal0 = loss_and_grad(ObjectiveSpec::focal(0.0), z, y, enc);
    const LossResult wce_half = loss_and_grad(ObjectiveSpec::wce(0.5), z, y, enc);
    const LossResult asig0 =
        loss_and_grad(ObjectiveSpec::asig(0.0, 0.5, 0.0, 0.0, 3.0), z, y, enc);

    worst = std::max(worst, std::abs(focal0.loss - ce.loss));
    worst = std::max(worst, (focal0.grad - ce.grad).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(wce_half.loss - 0.5 * ce.loss));
    worst = std::max(worst, (wce_half.grad - 0.5 * ce.grad).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(asig0.loss - 0.5 * ce.loss));
    worst = std::max(worst, (asig0.grad - 0.5 * ce.grad).cwiseAbs().maxCoeff());

    const Eigen::VectorXd p = shifted_sigmoid(z, 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(p(i) - 1.0 / (1.0 + std::exp(-z(i)))));
  }
  return {worst <= 1e-12, false, "max deviation " + format_double(worst)};
}

// ---- criterion 3: KRR against the dense oracle -----------------------------

Verdict criterion_krr_oracle() {
  auto rng = make_rng(55);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 19);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 6);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 12);
    const Eigen::MatrixXd X_s = testsup::random_matrix(rng, m, d);
    const Eigen::VectorXd y_s = testsup::random_vector(rng, m);
    const Eigen::MatrixXd X_t = testsup::random_matrix(rng, n, d);
    for (const KernelSpec& spec :
         {KernelSpec::rbf(1.1), KernelSpec::linear(), KernelSpec::polynomial(2, 1.0)}) {
      const Eigen::VectorXd z = krr_predict(krr_fit(X_s, y_s, 1e-4, spec), X_t);
      const Eigen::VectorXd want = testsup::dense_krr_predict(X_s, y_s, 1e-4, spec, X_t);
      worst = std::max(worst, testsup::rel_err(z, want));
    }
  }
  if (worst >= 1e-10) return {false, false, "oracle mismatch " + format_double(worst)};

  // near-interpolation at lambda = 1e-9
  auto rng2 = make_rng(56);
  const Eigen::MatrixXd X = testsup::random_matrix(rng2, 8, 3);
  const Eigen::VectorXd y = testsup::random_vector(rng2, 8);
  const Eigen::VectorXd z = krr_predict(krr_fit(X, y, 1e-9, KernelSpec::rbf(1.5)), X);
  const double interp = (z - y).cwiseAbs().maxCoeff();
  return {interp < 1e-4, false,
          "oracle err " + format_double(worst) + ", interpolation err " +
              format_double(interp)};
}

// ---- criterion 4: AUC against pair counting --------------------------------

Verdict criterion_auc() {
  auto rng = make_rng(77);
  std::uniform_int_distribution<int> size_dist(5, 200);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = size_dist(rng);
    const Eigen::VectorXi y = testsup::random_labels(rng, n);
    std::uniform_int_distribution<int> level(0, 7);  // heavy ties
    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = 0.125 * level(rng);
    if (auc_score(s, y) != testsup::auc_pairs(s, y)) {
      return {false, false, "mismatch at instance " + std::to_string(rep)};
    }
  }
  return {true, false, "50/50 instances exact"};
}

// ---- shared synthetic task for criteria 5-7 --------------------------------

struct Task {
  Dataset train;
  Dataset test;
  double eval_bandwidth = 0.0;  // one fixed krr evaluator for every arm
};

Task make_task() {
  const Dataset full = standardize(gen_synthetic(4000, 10, 10.0, 2.0, 7));
  auto [train, test] = split(full, SplitSpec{0.2, true, 7});
  const double h = median_bandwidth(train.features, 0);
  return {std::move(train), std::move(test), h};
}

ClassifierSpec task_krr(const Task& task, std::uint64_t seed) {
  ClassifierSpec spec = ClassifierSpec::of(ClassifierKind::krr);
  spec.krr_kernel = KernelSpec::rbf(task.eval_bandwidth);
  spec.seed = seed;
  return spec;
}

EvalReport coreset_report(const Task& task, const SyntheticSet& coreset,
                          std::uint64_t seed) {
  const auto model = train_classifier(task_krr(task, seed), coreset);
  return evaluate(*model, task.test);
}

double coreset_auc(const Task& task, const SyntheticSet& coreset, std::uint64_t seed) {
  return coreset_report(task, coreset, seed).auc;
}

SyntheticSet distill_once(const Task& task, Eigen::Index m, const ObjectiveSpec& objective,
                          std::uint64_t seed) {
  DistillConfig cfg;
  cfg.coreset_size = m;
  cfg.objective = objective;
  cfg.kernel = KernelSpec::rbf(0.0);  // resolve bandwidth by the median heuristic
  cfg.seed = seed;
  return distill(task.train, cfg).coreset;
}

ObjectiveSpec task_asig(const Task& task) {
  const double coe = rebalancing_coe(task.train.positives(), task.train.negatives());
  return ObjectiveSpec::asig(2.0, coe, 1.0, 0.0, imbalance_ratio(task.train));
}

Verdict criterion_small_coreset(const Task& task) {
  const double full_auc =
      evaluate(*train_classifier(task_krr(task, 0), task.train), task.test).auc;

  int wins = 0;
  double mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double auc = coreset_auc(task, distill_once(task, 40, ObjectiveSpec::ce(), seed),
                                   mix_seed(seed, 101));
    mean += auc / 5.0;
    if (auc >= 0.95 * full_auc) ++wins;
  }
  return {wins >= 4, false,
          "full auc " + format_double(full_auc) + ", m=40 mean auc " +
              format_double(mean) + ", " + std::to_string(wins) + "/5 seeds >= 95%"};
}

Verdict criterion_imbalance_gain(const Task& task) {
  const std::vector<std::pair<std::string, ObjectiveSpec>> arms = {
      {"mse", ObjectiveSpec::mse()},
      {"focal", ObjectiveSpec::focal(2.0)},
      {"asig", task_asig(task)},
  };
  double mean_auc[3] = {0, 0, 0};
  double mean_recall[3] = {0, 0, 0};
  for (std::size_t a = 0; a < arms.size(); ++a) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const EvalReport r = coreset_report(
          task, distill_once(task, 20, arms[a].second, seed), mix_seed(seed, 202));
      mean_auc[a] += r.auc / 5.0;
      mean_recall[a] += r.minority_recall / 5.0;
    }
  }
  const bool focal_auc_ok = mean_auc[1] >= mean_auc[0];
  const bool asig_auc_ok = mean_auc[2] >= mean_auc[0];
  const bool recall_ok = mean_recall[1] >= mean_recall[0] + 0.02 ||
                         mean_recall[2] >= mean_recall[0] + 0.02;
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "auc mse/focal/asig %.4f/%.4f/%.4f (focal>=mse %s, asig>=mse %s), "
                "recall %.4f/%.4f/%.4f (+0.02 clause %s)",
                mean_auc[0], mean_auc[1], mean_auc[2], focal_auc_ok ? "ok" : "VIOLATED",
                asig_auc_ok ? "ok" : "VIOLATED", mean_recall[0], mean_recall[1],
                mean_recall[2], recall_ok ? "ok" : "VIOLATED");
  return {focal_auc_ok && asig_auc_ok && recall_ok, false, buf};
}

Verdict criterion_random_baseline(const Task& task) {
  double mean_distilled = 0.0;
  double mean_random = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    mean_distilled +=
        coreset_auc(task, distill_once(task, 200, ObjectiveSpec::mse(), seed),
                    mix_seed(seed, 303)) /
        5.0;

    const Dataset sub = random_subset(task.train, 200, true, seed);
    const auto model = train_classifier(task_krr(task, mix_seed(seed, 303)), sub);
    mean_random += evaluate(*model, task.test).auc / 5.0;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "m=200 distilled %.4f vs random %.4f",
                mean_distilled, mean_random);
  return {mean_distilled >= mean_random - 0.01, false, buf};
}

// ---- criterion 8: optional Kaggle ingestion --------------------------------

Verdict criterion_kaggle() {
  fs::path path;
  if (const char* env = std::getenv("TABDIST_LENDING_CLUB")) path = env;
  if (path.empty() || !fs::exists(path)) {
    const fs::path fallback = "data/lending_club.csv";
    if (fs::exists(fallback))
      path = fallback;
    else
      return {true, true, "dataset not supplied locally"};
  }
  const char* label_env = std::getenv("TABDIST_LENDING_CLUB_LABEL");
  const char* pos_env = std::getenv("TABDIST_LENDING_CLUB_POSITIVE");
  const Dataset raw = load_csv(path, label_env ? label_env : "label",
                               pos_env ? pos_env : "1");
  if (raw.rows() != 14785 || raw.cols() != 55 || raw.positives() != 5475)
    return {false, false,
            "got N=" + std::to_string(raw.rows()) + " D=" + std::to_string(raw.cols()) +
                " positives=" + std::to_string(raw.positives())};
  const double ir = imbalance_ratio(raw);
  if (std::abs(ir - 1.70) > 0.01)
    return {false, false, "imbalance ratio " + format_double(ir)};

  const Dataset ds = standardize(raw);
  auto [train, test] = split(ds, SplitSpec{0.2, true, 7});
  SweepPlan plan;
  plan.objectives = {ObjectiveSpec::ce()};
  plan.sizes = {10, 20, 30, 50, 100, 200, 300, 500, 700, 900};
  plan.classifiers = {ClassifierSpec::of(ClassifierKind::krr)};
  plan.seeds = {1};
  plan.base.epochs = 30;
  plan.dataset_id = "lending_club";
  const SweepResult result = sweep(train, test, plan);
  const fs::path out = fs::temp_directory_path() / "tabdist_lending_sweep.csv";
  write_sweep_csv(result, out);
  const bool complete = result.rows.size() == plan.sizes.size();
  double best = 0.0;
  for (const auto& row : result.rows) best = std::max(best, row.report.auc);
  return {complete, false,
          "grid rows " + std::to_string(result.rows.size()) + ", best auc " +
              format_double(best) + " (reported, not gated)"};
}

// ---- criterion 9: byte-identical reruns ------------------------------------

Verdict criterion_determinism() {
  const std::string bin = testsup::cli_binary();
  if (bin.empty() || !fs::exists(bin))
    return {false, false, "TABDIST_BIN not set; cannot drive the CLI"};

  testsup::TempDir dir;
  testsup::write_file(dir.path() / "cfg.ini",
                      "[data]\n"
                      "synthetic_n = 300\n"
                      "synthetic_d = 5\n"
                      "synthetic_ir = 4\n"
                      "[distill]\n"
                      "m = 10\n"
                      "epochs = 5\n"
                      "seed = 13\n"
                      "[eval]\n"
                      "objectives = mse, ce\n"
                      "sizes = 8, 16\n"
                      "classifiers = knn\n"
                      "project_size = 16\n");

  for (const char* cmd : {"distill", "sweep"}) {
    const auto a = testsup::run_cli({cmd, "--config", "cfg.ini", "--out",
                                     std::string(cmd) + "_a", "--jobs", "1"},
                                    dir.path());
    const auto b = testsup::run_cli({cmd, "--config", "cfg.ini", "--out",
                                     std::string(cmd) + "_b", "--jobs", "3"},
                                    dir.path());
    if (a.exit_code != 0 || b.exit_code != 0)
      return {false, false, std::string(cmd) + " exited " + std::to_string(a.exit_code) +
                                "/" + std::to_string(b.exit_code)};
    const fs::path da = dir.path() / (std::string(cmd) + "_a");
    const fs::path db = dir.path() / (std::string(cmd) + "_b");
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(da)) {
      ++files;
      const auto name = entry.path().filename();
      if (testsup::read_file(entry.path()) != testsup::read_file(db / name))
        return {false, false, std::string(cmd) + ": " + name.string() + " differs"};
    }
    if (files == 0) return {false, false, std::string(cmd) + " produced no artifacts"};
  }
  return {true, false, "distill and sweep artifacts byte-identical across reruns"};
}

// ---- criterion 10: PCA properties -------------------------------------------

Verdict criterion_pca() {
  auto rng = make_rng(88);
  double worst_orth = 0.0;
  double worst_rot = 0.0;
  bool descending = true;
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 30 + static_cast<Eigen::Index>(rng() % 50);
    const Eigen::Index d = 3 + static_cast<Eigen::Index>(rng() % 5);
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng() % (d - 1));
    const Eigen::MatrixXd X = testsup::random_matrix(rng, n, d);
    const PcaModel model = pca_fit(X, k);

    const Eigen::MatrixXd gramian = model.components * model.components.transpose();
    worst_orth = std::max(
        worst_orth,
        (gramian - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j + 1 < k; ++j)
      descending = descending &&
                   model.explained_variance(j) >= model.explained_variance(j + 1);

    const Eigen::MatrixXd raw = testsup::random_matrix(rng, d, d);
    const Eigen::MatrixXd Q =
        Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ();
    const PcaModel rotated = pca_fit(X * Q, k);
    worst_rot = std::max(worst_rot, (model.explained_variance -
                                     rotated.explained_variance)
                                        .cwiseAbs()
                                        .maxCoeff());
  }
  const bool ok = worst_orth < 1e-8 && descending && worst_rot < 1e-6;
  return {ok, false,
          "orthonormality err " + format_double(worst_orth) + ", rotation err " +
              format_double(worst_rot)};
}

}  // namespace

int main() {
  int failures = 0;
  auto run = [&](int index, const char* label, Verdict v) {
    report(index, label, v);
    if (!v.ok && !v.skipped) ++failures;
  };

  run(1, "composite distillation gradients match finite differences",
      criterion_gradients());
  run(2, "objective reduction identities", criterion_identities());
  run(3, "krr solve/predict against the dense oracle", criterion_krr_oracle());
  run(4, "rank auc equals pair counting", criterion_auc());

  const Task task = make_task();
  run(5, "1% coreset approaches full-data auc", criterion_small_coreset(task));
  run(6, "imbalance-aware objectives beat mse at m=20", criterion_imbalance_gain(task));
  run(7, "distilled m=200 is not inferior to random subsets",
      criterion_random_baseline(task));
  run(8, "kaggle table reproduction (optional)", criterion_kaggle());
  run(9, "byte-identical artifacts on rerun", criterion_determinism());
  run(10, "pca orthonormality, ordering, rotation invariance", criterion_pca());

  if (failures == 0)
    std::printf("acceptance: all criteria satisfied\n");
  else
    std::printf("acceptance: %d criterion(s) failed\n", failures);
  return failures;
}
