#include "tabdist/distill.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "tabdist/common.hpp"
#include "tabdist/csv.hpp"

namespace tabdist {

namespace {

// Seed-stream tags so init noise, gaussian init, epoch shuffling, and the
// bandwidth heuristic never share draws with the subsample selection (which
// uses cfg.seed directly to stay aligned with random_subset).
constexpr std::uint64_t kStreamNoise = 1;
constexpr std::uint64_t kStreamGaussianInit = 2;
constexpr std::uint64_t kStreamShuffle = 3;
constexpr std::uint64_t kStreamBandwidth = 4;

Eigen::Index resolve_batch_size(const DistillConfig& cfg, Eigen::Index n) {
  if (cfg.batch_size > 0) return std::min(cfg.batch_size, n);
  return std::min<Eigen::Index>(1024, n);
}

double effective_ir(const Dataset& train, const DistillConfig& cfg) {
  return cfg.synthetic_ir > 0.0 ? cfg.synthetic_ir : imbalance_ratio(train);
}

KernelSpec resolve_kernel(const Dataset& train, const DistillConfig& cfg) {
  KernelSpec k = cfg.kernel;
  if (k.kind == KernelKind::rbf && !(k.bandwidth > 0.0)) {
    k.bandwidth = median_bandwidth(train.features, mix_seed(cfg.seed, kStreamBandwidth));
  }
  validate(k);
  return k;
}

Eigen::VectorXd encode_pm(const Eigen::VectorXi& y01) {
  Eigen::VectorXd enc(y01.size());
  for (Eigen::Index i = 0; i < y01.size(); ++i) enc[i] = y01[i] == 1 ? 1.0 : -1.0;
  return enc;
}

double full_target_loss(const SyntheticSet& s, const Dataset& train,
                        const Eigen::VectorXd& y_enc, const KernelSpec& kernel,
                        const DistillConfig& cfg) {
  auto model = krr_fit(s.points, s.targets, cfg.ridge, kernel);
  const Eigen::VectorXd z = krr_predict(model, train.features);
  return loss_and_grad(cfg.objective, z, train.labels, y_enc).loss;
}

}  // namespace

std::string init_kind_name(InitKind k) {
  switch (k) {
    case InitKind::subsample: return "subsample";
    case InitKind::subsample_noise: return "subsample_noise";
    case InitKind::gaussian: return "gaussian";
  }
  return "?";
}

InitKind init_kind_from_name(const std::string& name) {
  if (name == "subsample") return InitKind::subsample;
  if (name == "subsample_noise") return InitKind::subsample_noise;
  if (name == "gaussian") return InitKind::gaussian;
  throw ConfigError("unknown init kind: " + name);
}

void validate(const DistillConfig& cfg, const Dataset& train) {
  if (cfg.coreset_size < 2) {
    throw ConfigError("coreset size must be >= 2 (one row per class)");
  }
  if (cfg.coreset_size > train.rows()) {
    throw ConfigError("coreset size exceeds the training set");
  }
  if (cfg.epochs < 0) {
    throw ConfigError("epochs must be >= 0");
  }
  if (!(cfg.lr_points > 0.0) || !(cfg.lr_targets > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (cfg.batch_size < 0) {
    throw ConfigError("batch size must be >= 0 (0 = auto)");
  }
  if (!(cfg.noise_sigma >= 0.0)) {
    throw ConfigError("noise_sigma must be >= 0");
  }
  if (!(cfg.ridge > 0.0)) {
    throw ConfigError("ridge must be positive");
  }
  if (cfg.snapshot_every < 0) {
    throw ConfigError("snapshot_every must be >= 0");
  }
  validate(cfg.objective);
  if (!(cfg.kernel.kind == KernelKind::rbf && cfg.kernel.bandwidth <= 0.0)) {
    validate(cfg.kernel);  // bandwidth <= 0 on rbf is the median-heuristic sentinel
  }
  if (train.positives() < 1 || train.negatives() < 1) {
    throw DataError("distillation needs both classes in the training set");
  }
}

SyntheticSet init_synthetic(const Dataset& train, const DistillConfig& cfg) {
  validate(cfg, train);
  const auto m = cfg.coreset_size;
  const double ir = effective_ir(train, cfg);
  auto n_pos = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(m) / (1.0 + ir)));
  n_pos = std::clamp<Eigen::Index>(n_pos, 1, m - 1);
  const auto n_neg = m - n_pos;

  SyntheticSet s;
  s.seed_class = Eigen::VectorXi(m);
  s.seed_class.head(n_pos).setConstant(1);
  s.seed_class.tail(n_neg).setConstant(0);
  s.targets = encode_pm(s.seed_class);

  const auto d = train.cols();
  s.points = Eigen::MatrixXd(m, d);
  if (cfg.init == InitKind::gaussian) {
    auto rng = make_rng(mix_seed(cfg.seed, kStreamGaussianInit));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) s.points(i, j) = gauss(rng);
    }
    return s;
  }

  const auto idx = stratified_sample_indices(train.labels, n_pos, n_neg, cfg.seed);
  for (Eigen::Index i = 0; i < m; ++i) {
    s.points.row(i) = train.features.row(idx[static_cast<std::size_t>(i)]);
    s.seed_class[i] = train.labels[idx[static_cast<std::size_t>(i)]];
  }
  s.targets = encode_pm(s.seed_class);

  if (cfg.init == InitKind::subsample_noise && cfg.noise_sigma > 0.0) {
    auto rng = make_rng(mix_seed(cfg.seed, kStreamNoise));
    std::normal_distribution<double> gauss(0.0, cfg.noise_sigma);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) s.points(i, j) += gauss(rng);
    }
  }
  return s;
}

void adam_update(AdamState& state, Eigen::Ref<Eigen::ArrayXd> params,
                 const Eigen::Ref<const Eigen::ArrayXd>& grads, double lr) {
  if (params.size() != grads.size() || state.m.size() != params.size()) {
    throw DataError("adam_update: parameter/gradient/state shape mismatch");
  }
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  state.t += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * grads;
  state.v = beta2 * state.v + (1.0 - beta2) * grads.square();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  params -= lr * (state.m / c1) / ((state.v / c2).sqrt() + eps);
}

DistillResult distill(const Dataset& train, const DistillConfig& cfg) {
  validate(cfg, train);
  const KernelSpec kernel = resolve_kernel(train, cfg);
  const auto n = train.rows();
  const auto batch = resolve_batch_size(cfg, n);
  const Eigen::VectorXd y_enc_all = encode_pm(train.labels);

  DistillResult res;
  res.coreset = init_synthetic(train, cfg);
  res.trace.resolved_bandwidth =
      kernel.kind == KernelKind::rbf ? kernel.bandwidth : 0.0;
  res.trace.initial_full_loss =
      full_target_loss(res.coreset, train, y_enc_all, kernel, cfg);
  res.trace.snapshots.push_back({0, 0, res.trace.initial_full_loss});

  AdamState adam_x(res.coreset.points.size());
  AdamState adam_y(res.coreset.targets.size());
  auto shuffle_rng = make_rng(mix_seed(cfg.seed, kStreamShuffle));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (Eigen::Index start = 0; start < n; start += batch) {
      const auto len = std::min(batch, n - start);
      Eigen::MatrixXd Xb(len, train.cols());
      Eigen::VectorXi yb(len);
      for (Eigen::Index r = 0; r < len; ++r) {
        const auto src = order[static_cast<std::size_t>(start + r)];
        Xb.row(r) = train.features.row(src);
        yb[r] = train.labels[src];
      }
      const Eigen::VectorXd yb_enc = encode_pm(yb);

      step += 1;
      double batch_loss = 0.0;
      KrrGradients grads;
      try {
        auto model = krr_fit(res.coreset.points, res.coreset.targets, cfg.ridge, kernel);
        const Eigen::VectorXd z = krr_predict(model, Xb);
        auto lr = loss_and_grad(cfg.objective, z, yb, yb_enc);
        batch_loss = lr.loss;
        if (!std::isfinite(batch_loss)) {
          throw NumericError("batch loss is non-finite");
        }
        grads = krr_backward(res.coreset.points, res.coreset.targets, Xb, cfg.ridge,
                             kernel, lr.grad);
      } catch (const NumericError& e) {
        throw DivergenceError(epoch, step, res.trace,
                              "distillation diverged at epoch " + std::to_string(epoch) +
                                  ", step " + std::to_string(step) + ": " + e.what());
      }

      res.trace.steps.push_back({epoch, step, batch_loss});

      Eigen::Map<Eigen::ArrayXd> px(res.coreset.points.data(), res.coreset.points.size());
      Eigen::Map<const Eigen::ArrayXd> gx(grads.d_support_points.data(),
                                          grads.d_support_points.size());
      adam_update(adam_x, px, gx, cfg.lr_points);
      if (cfg.learn_targets) {
        Eigen::Map<Eigen::ArrayXd> py(res.coreset.targets.data(),
                                      res.coreset.targets.size());
        Eigen::Map<const Eigen::ArrayXd> gy(grads.d_support_labels.data(),
                                            grads.d_support_labels.size());
        adam_update(adam_y, py, gy, cfg.lr_targets);
        res.coreset.targets = res.coreset.targets.cwiseMax(-10.0).cwiseMin(10.0);
      }
    }
    if (cfg.snapshot_every > 0 && epoch % cfg.snapshot_every == 0 && epoch != cfg.epochs) {
      res.trace.snapshots.push_back(
          {epoch, step, full_target_loss(res.coreset, train, y_enc_all, kernel, cfg)});
    }
  }

  res.trace.final_full_loss =
      cfg.epochs == 0 ? res.trace.initial_full_loss
                      : full_target_loss(res.coreset, train, y_enc_all, kernel, cfg);
  if (cfg.epochs > 0) {
    res.trace.snapshots.push_back({cfg.epochs, step, res.trace.final_full_loss});
  }
  return res;
}

std::string dataset_hash(const Dataset& ds) {
  std::uint64_t h = fnv1a64(ds.features.data(), static_cast<std::size_t>(ds.features.size()) *
                                                    sizeof(double));
  h = fnv1a64(ds.labels.data(), static_cast<std::size_t>(ds.labels.size()) * sizeof(int), h);
  return to_hex(h);
}

namespace {

nlohmann::json config_to_json(const DistillConfig& cfg) {
  nlohmann::json j;
  j["m"] = cfg.coreset_size;
  j["epochs"] = cfg.epochs;
  j["lr_x"] = cfg.lr_points;
  j["lr_y"] = cfg.lr_targets;
  j["batch_size"] = cfg.batch_size;
  j["learn_labels"] = cfg.learn_targets;
  j["init"] = init_kind_name(cfg.init);
  j["noise_sigma"] = cfg.noise_sigma;
  j["synthetic_ir"] = cfg.synthetic_ir;
  j["ridge"] = cfg.ridge;
  j["seed"] = cfg.seed;
  j["snapshot_every"] = cfg.snapshot_every;
  j["objective"] = {{"kind", objective_kind_name(cfg.objective.kind)},
                    {"gamma", cfg.objective.gamma},
                    {"coe", cfg.objective.coe},
                    {"alpha_w", cfg.objective.alpha_w},
                    {"alpha_g", cfg.objective.alpha_g},
                    {"beta_g", cfg.objective.beta_g},
                    {"ir", cfg.objective.ir}};
  j["kernel"] = {{"kind", kernel_kind_name(cfg.kernel.kind)},
                 {"bandwidth", cfg.kernel.bandwidth},
                 {"degree", cfg.kernel.degree},
                 {"offset", cfg.kernel.offset}};
  return j;
}

}  // namespace

void export_coreset(const SyntheticSet& s, const std::vector<std::string>& feature_names,
                    const Standardization& st, const DistillConfig& cfg,
                    double final_loss, const std::string& provenance_hash,
                    const std::filesystem::path& csv_path) {
  if (st.dim() != s.cols() ||
      static_cast<Eigen::Index>(feature_names.size()) != s.cols()) {
    throw DataError("export_coreset: standardization/feature-name width mismatch");
  }
  const Eigen::MatrixXd raw = st.invert(s.points);

  std::vector<std::string> header = feature_names;
  header.push_back("y_class");
  header.push_back("y_s");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(s.cols()) + 2);
    for (Eigen::Index j = 0; j < s.cols(); ++j) row.push_back(format_double(raw(i, j)));
    row.push_back(std::to_string(s.seed_class[i]));
    row.push_back(format_double(s.targets[i]));
    rows.push_back(std::move(row));
  }
  write_csv(csv_path, header, rows);

  nlohmann::json side;
  side["m"] = s.rows();
  side["d"] = s.cols();
  side["final_loss"] = final_loss;
  side["provenance_hash"] = provenance_hash;
  side["feature_names"] = feature_names;
  side["config"] = config_to_json(cfg);
  nlohmann::json stj;
  stj["mean"] = std::vector<double>(st.mean.data(), st.mean.data() + st.mean.size());
  stj["stddev"] =
      std::vector<double>(st.stddev.data(), st.stddev.data() + st.stddev.size());
  stj["zero_variance"] = std::vector<int>(st.zero_variance.begin(), st.zero_variance.end());
  side["standardization"] = stj;

  auto json_path = csv_path;
  json_path.replace_extension(".json");
  write_text_atomic(json_path, side.dump(2) + "\n");
}

CoresetFile import_coreset(const std::filesystem::path& csv_path) {
  const CsvTable table = read_csv(csv_path);
  if (table.header.size() < 3 || table.header[table.header.size() - 2] != "y_class" ||
      table.header.back() != "y_s") {
    throw DataError("coreset CSV must end with y_class, y_s columns: " + csv_path.string());
  }
  auto json_path = csv_path;
  json_path.replace_extension(".json");
  nlohmann::json side;
  {
    std::ifstream in(json_path);
    if (!in) {
      throw DataError("missing coreset sidecar: " + json_path.string());
    }
    in >> side;
  }

  CoresetFile out;
  out.feature_names = side.at("feature_names").get<std::vector<std::string>>();
  out.final_loss = side.at("final_loss").get<double>();
  out.provenance_hash = side.at("provenance_hash").get<std::string>();
  const auto& stj = side.at("standardization");
  const auto mean = stj.at("mean").get<std::vector<double>>();
  const auto stddev = stj.at("stddev").get<std::vector<double>>();
  const auto zv = stj.at("zero_variance").get<std::vector<int>>();
  out.standardization.mean =
      Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  out.standardization.stddev = Eigen::Map<const Eigen::VectorXd>(
      stddev.data(), static_cast<Eigen::Index>(stddev.size()));
  out.standardization.zero_variance.assign(zv.begin(), zv.end());

  const auto d = static_cast<Eigen::Index>(table.header.size()) - 2;
  if (out.standardization.dim() != d) {
    throw DataError("coreset sidecar width disagrees with CSV: " + csv_path.string());
  }
  const auto m = static_cast<Eigen::Index>(table.rows.size());
  if (m < 1) {
    throw DataError("coreset CSV has no data rows: " + csv_path.string());
  }

  auto parse_or_throw = [&csv_path](const std::string& cell) {
    double v = 0.0;
    if (!try_parse_double(cell, v)) {
      throw DataError("unparseable numeric cell '" + cell + "' in " + csv_path.string());
    }
    return v;
  };

  Eigen::MatrixXd raw(m, d);
  out.synthetic.targets = Eigen::VectorXd(m);
  out.synthetic.seed_class = Eigen::VectorXi(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != d + 2) {
      throw DataError("ragged coreset CSV row in " + csv_path.string());
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      raw(i, j) = parse_or_throw(row[static_cast<std::size_t>(j)]);
    }
    const auto& cls = row[static_cast<std::size_t>(d)];
    if (cls != "0" && cls != "1") {
      throw DataError("coreset y_class must be 0/1 in " + csv_path.string());
    }
    out.synthetic.seed_class[i] = cls == "1" ? 1 : 0;
    out.synthetic.targets[i] = parse_or_throw(row[static_cast<std::size_t>(d) + 1]);
  }
  out.synthetic.points = out.standardization.apply(raw);
  return out;
}

void export_trace(const DistillTrace& trace, const std::filesystem::path& csv_path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trace.steps.size());
  for (const auto& s : trace.steps) {
    rows.push_back(
        {std::to_string(s.epoch), std::to_string(s.step), format_double(s.batch_loss)});
  }
  write_csv(csv_path, {"epoch", "step", "loss"}, rows);

  if (!trace.snapshots.empty()) {
    std::vector<std::vector<std::string>> snap;
    for (const auto& s : trace.snapshots) {
      snap.push_back(
          {std::to_string(s.epoch), std::to_string(s.step), format_double(s.full_loss)});
    }
    auto snap_path = csv_path;
    snap_path.replace_extension();
    snap_path += "_snapshots.csv";
    write_csv(snap_path, {"epoch", "step", "full_loss"}, snap);
  }
}

}  // namespace tabdist
