// Microbenchmarks for the hot paths: gram matrices, the krr solve and its
// adjoint, one distillation step at realistic shapes, and auc scoring.
#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>

#include "tabdist/common.hpp"
#include "tabdist/dataset.hpp"
#include "tabdist/distill.hpp"
#include "tabdist/evaluate.hpp"
#include "tabdist/kernel.hpp"
#include "tabdist/objectives.hpp"

using namespace tabdist;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = dist(rng);
  return X;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> dist;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

void bm_gram_rbf(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd A = random_matrix(m, 10, 1);
  const Eigen::MatrixXd B = random_matrix(1024, 10, 2);
  const KernelSpec spec = KernelSpec::rbf(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(gram(A, B, spec));
}
BENCHMARK(bm_gram_rbf)->Arg(20)->Arg(100)->Arg(400);

void bm_krr_fit(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd X = random_matrix(m, 10, 3);
  const Eigen::VectorXd y = random_vector(m, 4);
  const KernelSpec spec = KernelSpec::rbf(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(krr_fit(X, y, 1e-6, spec));
}
BENCHMARK(bm_krr_fit)->Arg(20)->Arg(100)->Arg(400);

void bm_krr_backward(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd X_s = random_matrix(m, 10, 5);
  const Eigen::VectorXd y_s = random_vector(m, 6);
  const Eigen::MatrixXd X_t = random_matrix(1024, 10, 7);
  const Eigen::VectorXd g = random_vector(1024, 8);
  const KernelSpec spec = KernelSpec::rbf(2.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(krr_backward(X_s, y_s, X_t, 1e-6, spec, g));
}
BENCHMARK(bm_krr_backward)->Arg(20)->Arg(100)->Arg(400);

void bm_distill_epoch(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const Dataset train = standardize(gen_synthetic(2048, 10, 9.0, 2.0, 9));
  DistillConfig cfg;
  cfg.coreset_size = m;
  cfg.epochs = 1;
  cfg.kernel = KernelSpec::rbf(0.0);
  cfg.objective = ObjectiveSpec::ce();
  cfg.seed = 11;
  for (auto _ : state) benchmark::DoNotOptimize(distill(train, cfg));
}
BENCHMARK(bm_distill_epoch)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_auc(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::VectorXd s = random_vector(n, 12);
  auto rng = make_rng(13);
  Eigen::VectorXi y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = (rng() % 10) == 0 ? 1 : 0;
  y(0) = 1;
  y(n - 1) = 0;
  for (auto _ : state) benchmark::DoNotOptimize(auc_score(s, y));
}
BENCHMARK(bm_auc)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
