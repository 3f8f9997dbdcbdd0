#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tabdist/common.hpp"
#include "tabdist/dataset.hpp"
#include "tabdist/kernel.hpp"
#include "tabdist/objectives.hpp"

namespace tabdist {

enum class InitKind { subsample, subsample_noise, gaussian };

std::string init_kind_name(InitKind k);
InitKind init_kind_from_name(const std::string& name);

struct DistillConfig {
  Eigen::Index coreset_size = 10;  // m
  int epochs = 100;
  double lr_points = 0.01;   // Adam step size for X_s
  double lr_targets = 0.005; // Adam step size for y_s
  Eigen::Index batch_size = 0;  // 0 resolves to min(1024, N)
  bool learn_targets = true;
  InitKind init = InitKind::subsample;
  double noise_sigma = 0.1;
  double synthetic_ir = 0.0;  // <= 0 means "match" the train imbalance ratio
  ObjectiveSpec objective;
  // rbf bandwidth <= 0 resolves to the median heuristic at distillation start.
  KernelSpec kernel = KernelSpec::rbf(0.0);
  double ridge = 1e-6;
  std::uint64_t seed = 0;
  int snapshot_every = 0;  // 0 disables periodic full-loss snapshots
};

// Throws ConfigError/DataError if cfg cannot drive a distillation of train.
// epochs == 0 is allowed (init-only debug runs).
void validate(const DistillConfig& cfg, const Dataset& train);

struct SyntheticSet {
  Eigen::MatrixXd points;      // X_s, standardized units
  Eigen::VectorXd targets;     // y_s, learnable regression targets
  Eigen::VectorXi seed_class;  // y_class, frozen 0/1 seeding class

  Eigen::Index rows() const { return points.rows(); }
  Eigen::Index cols() const { return points.cols(); }
};

struct TraceStep {
  int epoch = 0;
  long step = 0;  // global step index, strictly increasing
  double batch_loss = 0.0;
};

struct TraceSnapshot {
  int epoch = 0;
  long step = 0;
  double full_loss = 0.0;  // objective over the whole target set
};

struct DistillTrace {
  std::vector<TraceStep> steps;
  std::vector<TraceSnapshot> snapshots;  // always holds init and final entries
  double resolved_bandwidth = 0.0;       // bandwidth actually used (rbf only)
  double initial_full_loss = 0.0;
  double final_full_loss = 0.0;
};

// Raised when a batch loss turns non-finite or a kernel solve fails
// mid-optimization; carries the trace accumulated up to the failing step.
class DivergenceError : public NumericError {
 public:
  DivergenceError(int epoch, long step, DistillTrace trace, const std::string& what)
      : NumericError(what), epoch(epoch), step(step), trace(std::move(trace)) {}
  int epoch;
  long step;
  DistillTrace trace;
};

struct DistillResult {
  SyntheticSet coreset;
  DistillTrace trace;
};

// Seeds the coreset: class counts from synthetic_ir (positives first), rows
// per init kind, y_s = +1/-1 by class. Deterministic per cfg.seed; the
// subsample draw matches random_subset with the same seed and counts.
SyntheticSet init_synthetic(const Dataset& train, const DistillConfig& cfg);

// The distillation loop: per batch, fit KRR on the coreset, score the batch under the
// objective, backpropagate through the solve, and update with Adam. Kernel
// bandwidth and ridge stay frozen at their resolved initial values.
DistillResult distill(const Dataset& train, const DistillConfig& cfg);

struct AdamState {
  Eigen::ArrayXd m;  // first moment
  Eigen::ArrayXd v;  // second moment
  long t = 0;

  explicit AdamState(Eigen::Index n)
      : m(Eigen::ArrayXd::Zero(n)), v(Eigen::ArrayXd::Zero(n)) {}
};

// One Adam step (beta1 0.9, beta2 0.999, eps 1e-8, bias-corrected), exposed
// for unit testing.
void adam_update(AdamState& state, Eigen::Ref<Eigen::ArrayXd> params,
                 const Eigen::Ref<const Eigen::ArrayXd>& grads, double lr);

// Writes the coreset CSV in de-standardized units (columns: features...,
// y_class, y_s) plus a JSON sidecar with the config, final loss, and a
// provenance hash of the training data.
void export_coreset(const SyntheticSet& s, const std::vector<std::string>& feature_names,
                    const Standardization& st, const DistillConfig& cfg,
                    double final_loss, const std::string& provenance_hash,
                    const std::filesystem::path& csv_path);

struct CoresetFile {
  SyntheticSet synthetic;  // re-standardized via the sidecar parameters
  std::vector<std::string> feature_names;
  Standardization standardization;
  double final_loss = 0.0;
  std::string provenance_hash;
};

CoresetFile import_coreset(const std::filesystem::path& csv_path);

// Writes the per-step trace as CSV (epoch, step, loss) and snapshots
// alongside when present.
void export_trace(const DistillTrace& trace, const std::filesystem::path& csv_path);

// FNV-1a content hash of a dataset's features and labels, hex-encoded.
std::string dataset_hash(const Dataset& ds);

}  // namespace tabdist
