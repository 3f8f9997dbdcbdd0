#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabdist/dataset.hpp"

namespace tabdist {

struct CalibrationCell {
  double alpha_g = 0.0;
  double beta_g = 0.0;
  double auc = 0.0;
  std::string status = "ok";
};

struct CalibrationResult {
  double alpha_g = 0.0;
  double beta_g = 0.0;
  double best_auc = 0.0;
  std::vector<CalibrationCell> cells;  // grid order: alpha outer, beta inner
};

// Grid search for the asig shift parameters: per (alpha, beta), a short
// fixed-budget asig distillation (m=20, 20 epochs) on an 80/20 stratified
// split of `baseline`, scored by the validation AUC of a krr classifier
// trained on the coreset. Ties break toward smaller |alpha| then |beta|.
// Deterministic per seed; cells may run in parallel (jobs > 1).
CalibrationResult calibrate_g(const Dataset& baseline,
                              const std::vector<double>& grid_alpha,
                              const std::vector<double>& grid_beta, std::uint64_t seed,
                              int jobs = 1);

}  // namespace tabdist
