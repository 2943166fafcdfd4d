// Serial reference vs OpenMP kernels. Arg = number of rows.

#include <benchmark/benchmark.h>

#include <random>

#include "transduct/kernels.hpp"

using namespace transduct;

namespace {

constexpr Eigen::Index kDim = 64;
constexpr Eigen::Index kClasses = 20;

Matrix unit_rows(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(n, kDim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < kDim; ++c) m(i, c) = normal(rng);
    m.row(i).normalize();
  }
  return m;
}

template <Exec E>
void BM_LogProbs(benchmark::State& state) {
  const Matrix f = unit_rows(state.range(0), 1), mu = unit_rows(kClasses, 2);
  const Vector var = Vector::Constant(kDim, 1.0 / kDim);
  Matrix out;
  for (auto _ : state) {
    kernels::gmm_log_probs(f, mu, var, out, E);
    benchmark::DoNotOptimize(out.data());
  }
}

template <Exec E>
void BM_ZSweep(benchmark::State& state) {
  const Matrix f = unit_rows(state.range(0), 3);
  const AffinityGraph g = kernels::knn_graph(f, 3, Exec::Parallel);
  Matrix lp, prior, z;
  kernels::gmm_log_probs(f, unit_rows(kClasses, 4), Vector::Constant(kDim, 1.0 / kDim), lp, Exec::Parallel);
  kernels::soft_labels(f, unit_rows(kClasses, 5), 30.0, z, Exec::Parallel);
  prior = z.array().log();
  Matrix next;
  for (auto _ : state) {
    kernels::z_sweep(z, lp, prior, 0.5, g, 0, next, E);
    benchmark::DoNotOptimize(next.data());
  }
}

template <Exec E>
void BM_Knn(benchmark::State& state) {
  const Matrix f = unit_rows(state.range(0), 6);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::knn_graph(f, 3, E));
}

}  // namespace

BENCHMARK(BM_LogProbs<Exec::Serial>)->Arg(2000)->Arg(20000);
BENCHMARK(BM_LogProbs<Exec::Parallel>)->Arg(2000)->Arg(20000);
BENCHMARK(BM_ZSweep<Exec::Serial>)->Arg(2000)->Arg(20000);
BENCHMARK(BM_ZSweep<Exec::Parallel>)->Arg(2000)->Arg(20000);
BENCHMARK(BM_Knn<Exec::Serial>)->Arg(1000)->Arg(4000);
BENCHMARK(BM_Knn<Exec::Parallel>)->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
