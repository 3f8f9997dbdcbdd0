#include "tabdist/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "tabdist/classifiers.hpp"
#include "tabdist/common.hpp"
#include "tabdist/distill.hpp"
#include "tabdist/evaluate.hpp"
#include "tabdist/objectives.hpp"

namespace tabdist {

namespace {

constexpr std::uint64_t kStreamSplit = 0xCA11B3A7ULL;

CalibrationCell run_cell(double alpha, double beta, std::uint64_t cell_seed,
                         const Dataset& train, const Dataset& validation) {
  CalibrationCell cell;
  cell.alpha_g = alpha;
  cell.beta_g = beta;
  try {
    DistillConfig cfg;
    cfg.coreset_size = 20;
    cfg.epochs = 20;
    cfg.objective = ObjectiveSpec::asig(2.0, rebalancing_coe(train.positives(), train.negatives()),
                                        alpha, beta, imbalance_ratio(train));
    cfg.kernel = KernelSpec::rbf(0.0);  // median heuristic
    cfg.seed = cell_seed;
    auto coreset = distill(train, cfg).coreset;

    auto spec = ClassifierSpec::of(ClassifierKind::krr);
    spec.seed = mix_seed(cell_seed, 1);
    auto model = train_classifier(spec, coreset);
    cell.auc = evaluate(*model, validation, 0.5, coreset.rows()).auc;
  } catch (const std::exception& e) {
    cell.status = e.what();
    cell.auc = -1.0;  // never wins the argmax
  }
  return cell;
}

}  // namespace

CalibrationResult calibrate_g(const Dataset& baseline,
                              const std::vector<double>& grid_alpha,
                              const std::vector<double>& grid_beta, std::uint64_t seed,
                              int jobs) {
  if (grid_alpha.empty() || grid_beta.empty()) {
    throw ConfigError("calibrate_g needs nonempty alpha/beta grids");
  }
  if (baseline.positives() < 2 || baseline.negatives() < 2) {
    throw DataError("calibrate_g needs at least two samples of each class");
  }

  SplitSpec split_spec;
  split_spec.test_fraction = 0.2;
  split_spec.stratified = true;
  split_spec.seed = mix_seed(seed, kStreamSplit);
  auto [train_raw, validation_raw] = split(baseline, split_spec);

  // Standardize on the calibration train split; carry the transform onto the
  // validation features so both live in the same frame.
  const Dataset train = standardize(train_raw);
  Dataset validation = validation_raw;
  validation.features = train.standardization->apply(validation_raw.features);
  validation.standardization = train.standardization;

  struct Job {
    std::size_t ai, bi;
  };
  std::vector<Job> jobs_list;
  for (std::size_t ai = 0; ai < grid_alpha.size(); ++ai) {
    for (std::size_t bi = 0; bi < grid_beta.size(); ++bi) {
      jobs_list.push_back({ai, bi});
    }
  }

  CalibrationResult res;
  res.cells.resize(jobs_list.size());
  auto run_one = [&](std::size_t i) {
    const auto [ai, bi] = jobs_list[i];
    res.cells[i] = run_cell(grid_alpha[ai], grid_beta[bi],
                            mix_seed(seed, static_cast<std::uint64_t>(ai),
                                     static_cast<std::uint64_t>(bi)),
                            train, validation);
  };

  const int n_jobs = std::max(1, jobs);
  if (n_jobs == 1 || jobs_list.size() == 1) {
    for (std::size_t i = 0; i < jobs_list.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs_list.size()) break;
        run_one(i);
      }
    };
    std::vector<std::thread> pool;
    const auto n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(n_jobs), jobs_list.size());
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const CalibrationCell* best = nullptr;
  for (const auto& cell : res.cells) {
    if (cell.status != "ok") continue;
    if (best == nullptr || cell.auc > best->auc ||
        (cell.auc == best->auc &&
         (std::abs(cell.alpha_g) < std::abs(best->alpha_g) ||
          (std::abs(cell.alpha_g) == std::abs(best->alpha_g) &&
           std::abs(cell.beta_g) < std::abs(best->beta_g))))) {
      best = &cell;
    }
  }
  if (best == nullptr) {
    throw NumericError("calibrate_g: every grid cell failed");
  }
  res.alpha_g = best->alpha_g;
  res.beta_g = best->beta_g;
  res.best_auc = best->auc;
  return res;
}

}  // namespace tabdist
