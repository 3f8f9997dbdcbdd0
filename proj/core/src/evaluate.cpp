#include "tabdist/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tabdist/common.hpp"
#include "tabdist/csv.hpp"

namespace tabdist {

double auc_score(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  const auto n = scores.size();
  if (labels.size() != n || n < 2) {
    throw DataError("auc needs matching scores/labels with n >= 2");
  }
  const auto n_pos = (labels.array() == 1).count();
  const auto n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("auc needs both classes present");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&scores](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });

  // Average ranks over tie groups, summed for positives.
  double rank_sum_pos = 0.0;
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && scores[order[static_cast<std::size_t>(j + 1)]] ==
                            scores[order[static_cast<std::size_t>(i)]]) {
      ++j;
    }
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (Eigen::Index k = i; k <= j; ++k) {
      if (labels[order[static_cast<std::size_t>(k)]] == 1) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }

  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

EvalReport evaluate(const Classifier& model, const Dataset& test, double threshold,
                    Eigen::Index n_train) {
  if (test.rows() < 2 || test.positives() == 0 || test.negatives() == 0) {
    throw DataError("evaluate needs a test set with both classes");
  }
  const Eigen::VectorXd scores = model.predict_proba(test.features);

  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    const bool pred_pos = scores[i] >= threshold;
    if (test.labels[i] == 1) {
      (pred_pos ? tp : fn) += 1;
    } else {
      (pred_pos ? fp : tn) += 1;
    }
  }

  EvalReport r;
  r.auc = auc_score(scores, test.labels);
  const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double recall = tp / (tp + fn);
  r.f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  r.balanced_accuracy = 0.5 * (recall + tn / (tn + fp));
  r.minority_recall = recall;
  r.n_train = n_train;
  r.n_test = test.rows();
  r.threshold = threshold;
  return r;
}

std::uint64_t sweep_cell_seed(std::uint64_t seed, std::size_t size_index) {
  return mix_seed(seed, static_cast<std::uint64_t>(size_index));
}

namespace {

enum class CellKind { distilled, random_subset, full };

struct Cell {
  CellKind kind;
  std::size_t objective_index = 0;
  std::size_t size_index = 0;
  std::size_t seed_index = 0;
};

std::vector<SweepRow> run_cell(const Cell& cell, const Dataset& train, const Dataset& test,
                               const SweepPlan& plan) {
  const std::uint64_t user_seed = plan.seeds[cell.seed_index];
  std::vector<SweepRow> rows;
  rows.reserve(plan.classifiers.size());

  std::string source, objective_name;
  Eigen::Index m = 0;
  std::uint64_t cell_seed = 0;
  const SyntheticSet* coreset = nullptr;
  SyntheticSet distilled;
  Dataset subset;
  const Dataset* train_ds = nullptr;
  std::string cell_error;

  switch (cell.kind) {
    case CellKind::distilled: {
      source = "distilled";
      objective_name = objective_kind_name(plan.objectives[cell.objective_index].kind);
      m = plan.sizes[cell.size_index];
      cell_seed = sweep_cell_seed(user_seed, cell.size_index);
      try {
        DistillConfig cfg = plan.base;
        cfg.coreset_size = m;
        cfg.objective = plan.objectives[cell.objective_index];
        cfg.seed = cell_seed;
        distilled = distill(train, cfg).coreset;
        coreset = &distilled;
      } catch (const std::exception& e) {
        cell_error = e.what();
      }
      break;
    }
    case CellKind::random_subset: {
      source = "random_subset";
      objective_name = "none";
      m = plan.sizes[cell.size_index];
      cell_seed = sweep_cell_seed(user_seed, cell.size_index);
      try {
        subset = random_subset(train, static_cast<int>(m), true, cell_seed);
        train_ds = &subset;
      } catch (const std::exception& e) {
        cell_error = e.what();
      }
      break;
    }
    case CellKind::full: {
      source = "original";
      objective_name = "none";
      m = train.rows();
      cell_seed = mix_seed(user_seed, 0x8A5E11FEULL);
      train_ds = &train;
      break;
    }
  }

  for (std::size_t ci = 0; ci < plan.classifiers.size(); ++ci) {
    SweepRow row;
    row.dataset = plan.dataset_id;
    row.source = source;
    row.objective = objective_name;
    row.m = m;
    row.classifier = classifier_kind_name(plan.classifiers[ci].kind);
    row.seed = user_seed;
    row.report.n_train = m;
    row.report.n_test = test.rows();
    row.report.threshold = plan.threshold;
    if (!cell_error.empty()) {
      row.status = cell_error;
      rows.push_back(std::move(row));
      continue;
    }
    try {
      ClassifierSpec spec = plan.classifiers[ci];
      spec.seed = mix_seed(cell_seed, 1000 + static_cast<std::uint64_t>(ci));
      auto model = coreset != nullptr ? train_classifier(spec, *coreset)
                                      : train_classifier(spec, *train_ds);
      row.report = evaluate(*model, test, plan.threshold, m);
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

SweepResult sweep(const Dataset& train, const Dataset& test, const SweepPlan& plan) {
  if (plan.objectives.empty() || plan.sizes.empty() || plan.classifiers.empty() ||
      plan.seeds.empty()) {
    throw ConfigError("sweep needs nonempty objectives, sizes, classifiers, seeds");
  }

  std::vector<Cell> cells;
  for (std::size_t oi = 0; oi < plan.objectives.size(); ++oi) {
    for (std::size_t si = 0; si < plan.sizes.size(); ++si) {
      for (std::size_t ki = 0; ki < plan.seeds.size(); ++ki) {
        cells.push_back({CellKind::distilled, oi, si, ki});
      }
    }
  }
  if (plan.include_random_baseline) {
    for (std::size_t si = 0; si < plan.sizes.size(); ++si) {
      for (std::size_t ki = 0; ki < plan.seeds.size(); ++ki) {
        cells.push_back({CellKind::random_subset, 0, si, ki});
      }
    }
  }
  if (plan.include_full_baseline) {
    for (std::size_t ki = 0; ki < plan.seeds.size(); ++ki) {
      cells.push_back({CellKind::full, 0, 0, ki});
    }
  }

  std::vector<std::vector<SweepRow>> blocks(cells.size());
  const int jobs = std::max(1, plan.jobs);
  if (jobs == 1 || cells.size() == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      blocks[i] = run_cell(cells[i], train, test, plan);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) break;
        blocks[i] = run_cell(cells[i], train, test, plan);
      }
    };
    std::vector<std::thread> pool;
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), cells.size());
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  for (auto& block : blocks) {
    for (auto& row : block) result.rows.push_back(std::move(row));
  }
  return result;
}

namespace {

std::vector<std::string> sweep_row_cells(const SweepRow& r) {
  const bool ok = r.status == "ok";
  return {r.dataset,
          r.source,
          r.objective,
          std::to_string(r.m),
          r.classifier,
          std::to_string(r.seed),
          ok ? format_double(r.report.auc) : "",
          ok ? format_double(r.report.f1) : "",
          ok ? format_double(r.report.balanced_accuracy) : "",
          ok ? format_double(r.report.minority_recall) : "",
          r.status};
}

}  // namespace

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(result.rows.size());
  for (const auto& r : result.rows) rows.push_back(sweep_row_cells(r));
  write_csv(path,
            {"dataset", "source", "objective", "m", "classifier", "seed", "auc", "f1",
             "balanced_accuracy", "minority_recall", "status"},
            rows);
}

void write_sweep_json(const SweepResult& result, const std::filesystem::path& path) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows) {
    nlohmann::json j;
    j["dataset"] = r.dataset;
    j["source"] = r.source;
    j["objective"] = r.objective;
    j["m"] = r.m;
    j["classifier"] = r.classifier;
    j["seed"] = r.seed;
    j["status"] = r.status;
    if (r.status == "ok") {
      j["auc"] = r.report.auc;
      j["f1"] = r.report.f1;
      j["balanced_accuracy"] = r.report.balanced_accuracy;
      j["minority_recall"] = r.report.minority_recall;
    }
    j["n_train"] = r.report.n_train;
    j["n_test"] = r.report.n_test;
    rows.push_back(std::move(j));
  }
  write_text_atomic(path, rows.dump(2) + "\n");
}

}  // namespace tabdist
