#include "tabdist/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "tabdist/common.hpp"
#include "tabdist/csv.hpp"

namespace tabdist {

namespace {

// Partial Fisher-Yates: first m entries of a seeded permutation of `pool`.
std::vector<Eigen::Index> draw_without_replacement(std::vector<Eigen::Index> pool,
                                                   Eigen::Index m, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(pool.size());
  for (Eigen::Index i = 0; i < m && i < n - 1; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(std::min(m, n));
  return pool;
}

Dataset take_rows(const Dataset& ds, const std::vector<Eigen::Index>& idx) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), ds.cols());
  out.labels.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(idx[i]);
    out.labels[static_cast<Eigen::Index>(i)] = ds.labels[idx[i]];
  }
  out.feature_names = ds.feature_names;
  out.standardization = ds.standardization;
  return out;
}

}  // namespace

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& raw) const {
  if (raw.cols() != mean.size()) {
    throw DataError("standardization dimension mismatch");
  }
  Eigen::MatrixXd out = raw;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double divisor = zero_variance[static_cast<std::size_t>(j)] ? 1.0 : stddev[j];
    out.col(j) = (raw.col(j).array() - mean[j]) / divisor;
  }
  return out;
}

Eigen::MatrixXd Standardization::invert(const Eigen::MatrixXd& standardized) const {
  if (standardized.cols() != mean.size()) {
    throw DataError("standardization dimension mismatch");
  }
  Eigen::MatrixXd out = standardized;
  for (Eigen::Index j = 0; j < standardized.cols(); ++j) {
    const double divisor = zero_variance[static_cast<std::size_t>(j)] ? 1.0 : stddev[j];
    out.col(j) = standardized.col(j).array() * divisor + mean[j];
  }
  return out;
}

void validate(const Dataset& ds) {
  if (ds.features.rows() == 0 || ds.features.cols() == 0) {
    throw DataError("dataset is empty");
  }
  if (!ds.features.allFinite()) {
    throw DataError("dataset contains non-finite feature values");
  }
  if (ds.labels.size() != ds.features.rows()) {
    throw DataError("label count does not match row count");
  }
  for (Eigen::Index i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i] != 0 && ds.labels[i] != 1) {
      throw DataError("labels must be 0 or 1");
    }
  }
  if (ds.positives() == 0 || ds.negatives() == 0) {
    throw DataError("dataset must contain both classes");
  }
  if (!ds.feature_names.empty() &&
      static_cast<Eigen::Index>(ds.feature_names.size()) != ds.cols()) {
    throw DataError("feature name count does not match column count");
  }
  if (ds.standardization) {
    const auto& st = *ds.standardization;
    if (st.mean.size() != ds.cols() || st.stddev.size() != ds.cols() ||
        static_cast<Eigen::Index>(st.zero_variance.size()) != ds.cols()) {
      throw DataError("standardization record does not match column count");
    }
  }
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::string& positive_value) {
  CsvTable table = read_csv(path);
  auto it = std::find(table.header.begin(), table.header.end(), label_column);
  if (it == table.header.end()) {
    throw DataError("label column '" + label_column + "' not found in " + path.string());
  }
  const auto label_idx = static_cast<std::size_t>(it - table.header.begin());
  const std::size_t ncols = table.header.size();
  const std::size_t d = ncols - 1;
  if (d == 0) {
    throw DataError("CSV has no feature columns: " + path.string());
  }

  std::vector<std::vector<double>> kept;
  std::vector<int> labels;
  kept.reserve(table.rows.size());
  std::vector<double> row(d);
  for (const auto& cells : table.rows) {
    if (cells.size() != ncols) continue;  // ragged row: treat as missing
    bool ok = true;
    std::size_t k = 0;
    for (std::size_t j = 0; j < ncols && ok; ++j) {
      if (j == label_idx) {
        if (cells[j].empty()) ok = false;
        continue;
      }
      ok = try_parse_double(cells[j], row[k]);
      ++k;
    }
    if (!ok) continue;
    kept.push_back(row);
    labels.push_back(cells[label_idx] == positive_value ? 1 : 0);
  }

  if (kept.empty()) {
    throw DataError("no rows survive cleaning in " + path.string());
  }

  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(d));
  ds.labels.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kept[i][j];
    }
    ds.labels[static_cast<Eigen::Index>(i)] = labels[i];
  }
  ds.feature_names.reserve(d);
  for (std::size_t j = 0; j < ncols; ++j) {
    if (j != label_idx) ds.feature_names.push_back(table.header[j]);
  }
  if (ds.positives() == 0 || ds.negatives() == 0) {
    throw DataError("only one class present after cleaning " + path.string());
  }
  return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& csv_path,
              const std::string& label_column) {
  std::vector<std::string> header = ds.feature_names;
  if (header.empty()) {
    for (Eigen::Index j = 0; j < ds.cols(); ++j) header.push_back("f" + std::to_string(j));
  }
  header.push_back(label_column);

  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(ds.rows()));
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    std::vector<std::string> r;
    r.reserve(static_cast<std::size_t>(ds.cols()) + 1);
    for (Eigen::Index j = 0; j < ds.cols(); ++j) r.push_back(format_double(ds.features(i, j)));
    r.push_back(std::to_string(ds.labels[i]));
    rows.push_back(std::move(r));
  }
  write_csv(csv_path, header, rows);

  nlohmann::json side;
  side["rows"] = ds.rows();
  side["columns"] = ds.cols();
  side["positives"] = ds.positives();
  side["negatives"] = ds.negatives();
  side["imbalance_ratio"] = imbalance_ratio(ds);
  side["label_column"] = label_column;
  side["feature_names"] = std::vector<std::string>(header.begin(), header.end() - 1);
  if (ds.standardization) {
    const auto& st = *ds.standardization;
    nlohmann::json j;
    j["mean"] = std::vector<double>(st.mean.data(), st.mean.data() + st.mean.size());
    j["stddev"] = std::vector<double>(st.stddev.data(), st.stddev.data() + st.stddev.size());
    j["zero_variance"] = std::vector<bool>(st.zero_variance.begin(), st.zero_variance.end());
    side["standardization"] = j;
  } else {
    side["standardization"] = nullptr;
  }
  auto json_path = csv_path;
  json_path.replace_extension(".json");
  write_text_atomic(json_path, side.dump(2) + "\n");
}

double imbalance_ratio(const Dataset& ds) {
  const auto pos = ds.positives();
  const auto neg = ds.negatives();
  if (pos == 0 || neg == 0) {
    throw DataError("imbalance ratio undefined for single-class dataset");
  }
  return static_cast<double>(std::max(pos, neg)) / static_cast<double>(std::min(pos, neg));
}

Dataset standardize(const Dataset& ds) {
  if (ds.standardization) {
    throw DataError("dataset already standardized");
  }
  const auto n = ds.rows();
  const auto d = ds.cols();
  if (n < 2) {
    throw DataError("standardize needs at least 2 rows");
  }

  Standardization st;
  st.mean = ds.features.colwise().mean();
  st.stddev.resize(d);
  st.zero_variance.assign(static_cast<std::size_t>(d), 0);

  Dataset out = ds;
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::ArrayXd centered = ds.features.col(j).array() - st.mean[j];
    const double var = centered.square().sum() / static_cast<double>(n - 1);
    const double sd = std::sqrt(std::max(var, 0.0));
    st.stddev[j] = sd;
    if (sd <= 1e-12 * (1.0 + std::abs(st.mean[j]))) {
      st.stddev[j] = 0.0;
      st.zero_variance[static_cast<std::size_t>(j)] = 1;
      out.features.col(j).setZero();
    } else {
      out.features.col(j) = centered / sd;
    }
  }
  out.standardization = std::move(st);
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw DataError("test_fraction must lie strictly between 0 and 1");
  }
  const auto n = ds.rows();
  if (n < 4) {
    throw DataError("split needs at least 4 rows");
  }
  const auto n_test = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(n) * spec.test_fraction));
  if (n_test == 0 || n_test == n) {
    throw DataError("test_fraction leaves one side of the split empty");
  }

  auto rng = make_rng(spec.seed);
  std::vector<Eigen::Index> test_idx;
  if (spec.stratified) {
    if (ds.positives() < 2 || ds.negatives() < 2) {
      throw DataError("stratified split needs at least 2 rows per class");
    }
    const auto n_test_pos = static_cast<Eigen::Index>(
        std::llround(static_cast<double>(ds.positives()) * spec.test_fraction));
    const auto n_test_neg = n_test - n_test_pos;
    std::vector<Eigen::Index> pos, neg;
    for (Eigen::Index i = 0; i < n; ++i) (ds.labels[i] == 1 ? pos : neg).push_back(i);
    test_idx = draw_without_replacement(std::move(pos), n_test_pos, rng);
    auto neg_draw = draw_without_replacement(std::move(neg), n_test_neg, rng);
    test_idx.insert(test_idx.end(), neg_draw.begin(), neg_draw.end());
  } else {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    test_idx = draw_without_replacement(std::move(all), n_test, rng);
  }

  std::vector<char> in_test(static_cast<std::size_t>(n), 0);
  for (auto i : test_idx) in_test[static_cast<std::size_t>(i)] = 1;
  std::vector<Eigen::Index> train_idx;
  train_idx.reserve(static_cast<std::size_t>(n - n_test));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!in_test[static_cast<std::size_t>(i)]) train_idx.push_back(i);
  }
  std::sort(test_idx.begin(), test_idx.end());
  return {take_rows(ds, train_idx), take_rows(ds, test_idx)};
}

std::vector<Eigen::Index> stratified_sample_indices(const Eigen::VectorXi& labels,
                                                    Eigen::Index n_pos, Eigen::Index n_neg,
                                                    std::uint64_t seed) {
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  auto rng = make_rng(seed);

  auto draw_cycled = [&rng](const std::vector<Eigen::Index>& pool, Eigen::Index want) {
    std::vector<Eigen::Index> out;
    out.reserve(static_cast<std::size_t>(want));
    while (static_cast<Eigen::Index>(out.size()) < want) {
      const auto need = want - static_cast<Eigen::Index>(out.size());
      auto round = draw_without_replacement(pool, need, rng);
      out.insert(out.end(), round.begin(), round.end());
      if (round.empty()) break;  // empty pool
    }
    return out;
  };

  auto idx = draw_cycled(pos, n_pos);
  auto neg_draw = draw_cycled(neg, n_neg);
  idx.insert(idx.end(), neg_draw.begin(), neg_draw.end());
  return idx;
}

Dataset random_subset(const Dataset& ds, int m, bool stratified, std::uint64_t seed) {
  const auto n = ds.rows();
  if (m < 1 || m > n) {
    throw DataError("subset size out of range");
  }
  if (stratified) {
    auto n_pos = static_cast<Eigen::Index>(std::llround(
        static_cast<double>(m) * static_cast<double>(ds.positives()) / static_cast<double>(n)));
    n_pos = std::max<Eigen::Index>(n_pos, 1);
    n_pos = std::min(n_pos, ds.positives());
    auto n_neg = m - n_pos;
    if (n_neg > ds.negatives()) {
      n_neg = ds.negatives();
      n_pos = m - n_neg;
    }
    if (n_pos < 1 || n_neg < 1) {
      throw DataError("subset too small for one sample per class");
    }
    return take_rows(ds, stratified_sample_indices(ds.labels, n_pos, n_neg, seed));
  }
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  auto rng = make_rng(seed);
  return take_rows(ds, draw_without_replacement(std::move(all), m, rng));
}

Dataset gen_synthetic(int n, int d, double ir, double separation, std::uint64_t seed) {
  if (n < 10 || d < 1 || ir < 1.0 || separation < 0.0) {
    throw DataError("gen_synthetic: need n >= 10, d >= 1, ir >= 1, separation >= 0");
  }
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::VectorXd direction(d);
  do {
    for (Eigen::Index j = 0; j < d; ++j) direction[j] = gauss(rng);
  } while (direction.norm() == 0.0);
  direction.normalize();

  const auto n_pos = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::llround(static_cast<double>(n) / (1.0 + ir))));
  const Eigen::VectorXd mean_pos = 0.5 * separation * direction;
  const Eigen::VectorXd mean_neg = -mean_pos;

  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool positive = i < n_pos;
    const Eigen::VectorXd& mu = positive ? mean_pos : mean_neg;
    for (Eigen::Index j = 0; j < d; ++j) ds.features(i, j) = mu[j] + gauss(rng);
    ds.labels[i] = positive ? 1 : 0;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  ds.feature_names.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  return take_rows(ds, order);
}

}  // namespace tabdist
