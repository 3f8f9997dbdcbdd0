#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tabdist/dataset.hpp"
#include "tabdist/kernel.hpp"
#include "tabdist/objectives.hpp"

// Shared test oracles. Everything here is deliberately written the slow,
// obvious way (entrywise loops, full-pivot LU, O(n^2) pair counts) so it
// shares no code path with the library under test.
namespace testsup {

// --- deterministic random instances ------------------------------------

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                                     Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
  return out;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n,
                                     double scale = 1.0) {
  return random_matrix(rng, n, 1, scale).col(0);
}

// 0/1 labels with at least one of each class.
inline Eigen::VectorXi random_labels(std::mt19937_64& rng, Eigen::Index n) {
  std::bernoulli_distribution coin(0.5);
  Eigen::VectorXi y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = coin(rng) ? 1 : 0;
  y(0) = 1;
  y(n - 1) = 0;
  return y;
}

// --- scalar kernel + dense KRR oracle ----------------------------------

inline double kernel_value(const Eigen::MatrixXd& A, Eigen::Index i,
                           const Eigen::MatrixXd& B, Eigen::Index j,
                           const tabdist::KernelSpec& spec) {
  double dot = 0.0;
  double sq = 0.0;
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    dot += A(i, c) * B(j, c);
    const double d = A(i, c) - B(j, c);
    sq += d * d;
  }
  switch (spec.kind) {
    case tabdist::KernelKind::rbf:
      return std::exp(-sq / (2.0 * spec.bandwidth * spec.bandwidth));
    case tabdist::KernelKind::linear:
      return dot;
    case tabdist::KernelKind::polynomial:
      return std::pow(dot + spec.offset, spec.degree);
  }
  return 0.0;
}

// Direct dense solve of (K_ss + lambda*m*I) dual = y_s with full-pivot LU,
// predictions by explicit summation.
inline Eigen::VectorXd dense_krr_predict(const Eigen::MatrixXd& X_s,
                                         const Eigen::VectorXd& y_s, double lambda,
                                         const tabdist::KernelSpec& spec,
                                         const Eigen::MatrixXd& X_t) {
  const Eigen::Index m = X_s.rows();
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) A(i, j) = kernel_value(X_s, i, X_s, j, spec);
  for (Eigen::Index i = 0; i < m; ++i) A(i, i) += lambda * static_cast<double>(m);
  const Eigen::VectorXd dual = A.fullPivLu().solve(y_s);
  Eigen::VectorXd z(X_t.rows());
  for (Eigen::Index t = 0; t < X_t.rows(); ++t) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) acc += kernel_value(X_t, t, X_s, j, spec) * dual(j);
    z(t) = acc;
  }
  return z;
}

// --- finite differences -------------------------------------------------

template <typename F>
Eigen::VectorXd fd_gradient(const F& f, Eigen::VectorXd x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x(i);
    x(i) = orig + h;
    const double fp = f(x);
    x(i) = orig - h;
    const double fm = f(x);
    x(i) = orig;
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  const double denom = std::max(want.norm(), 1e-12);
  return (got - want).norm() / denom;
}

// --- exact equality (bitwise) ---------------------------------------------

template <typename A, typename B>
bool same_matrix(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

// --- O(n^2) AUC oracle ---------------------------------------------------

inline double auc_pairs(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  double wins = 0.0;
  long np = 0;
  long nn = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) == 1) {
      ++np;
      continue;
    }
    ++nn;
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1) continue;
    for (Eigen::Index j = 0; j < labels.size(); ++j) {
      if (labels(j) != 0) continue;
      if (scores(i) > scores(j))
        wins += 1.0;
      else if (scores(i) == scores(j))
        wins += 0.5;
    }
  }
  return wins / (static_cast<double>(np) * static_cast<double>(nn));
}

// --- filesystem helpers --------------------------------------------------

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    std::ostringstream name;
    name << "tabdist_test_" << rd() << "_" << counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() / name.str();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// --- multiset row comparison --------------------------------------------

inline std::vector<std::string> row_keys(const tabdist::Dataset& ds) {
  std::vector<std::string> keys;
  keys.reserve(static_cast<std::size_t>(ds.rows()));
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    std::ostringstream key;
    key.precision(17);
    for (Eigen::Index j = 0; j < ds.cols(); ++j) key << ds.features(i, j) << ",";
    key << ds.labels(i);
    keys.push_back(key.str());
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

// --- CLI subprocess runner ------------------------------------------------

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string cli_binary() {
  const char* bin = std::getenv("TABDIST_BIN");
  return bin == nullptr ? std::string() : std::string(bin);
}

inline std::string shell_quote(const std::string& s) {
  std::string quoted = "'";
  for (char c : s) {
    if (c == '\'')
      quoted += "'\\''";
    else
      quoted += c;
  }
  quoted += "'";
  return quoted;
}

inline CliResult run_cli(const std::vector<std::string>& args,
                         const std::filesystem::path& workdir) {
  CliResult result;
  const std::filesystem::path out_file = workdir / "_stdout.txt";
  const std::filesystem::path err_file = workdir / "_stderr.txt";
  std::string cmd = "cd " + shell_quote(workdir.string()) + " && " +
                    shell_quote(cli_binary());
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " > " + shell_quote(out_file.string()) + " 2> " + shell_quote(err_file.string());
  const int status = std::system(cmd.c_str());
  if (status >= 0 && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.out = read_file(out_file);
  result.err = read_file(err_file);
  std::filesystem::remove(out_file);
  std::filesystem::remove(err_file);
  return result;
}

}  // namespace testsup
