// Serial reference vs OpenMP kernels on platoon-sized inputs.

#include <benchmark/benchmark.h>

#include "ddinv/kernels.hpp"
#include "ddinv/random.hpp"

using namespace ddinv;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = rng.uniform(-1.0, 1.0);
  return M;
}

Matrix box_rows(Eigen::Index n) {
  Matrix D = Matrix::Zero(2 * n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    D(2 * i, i) = 1.0;
    D(2 * i + 1, i) = -1.0;
  }
  return D;
}

template <auto Fn>
void BM_assemble(benchmark::State& state) {
  const Eigen::Index T = state.range(0);
  const Matrix W0 = random_matrix(5, T, 1), X1 = random_matrix(3, T, 2), D = box_rows(3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(W0, X1, D, 0.05));
  state.SetItemsProcessed(state.iterations() * T);
}

template <auto Fn>
void BM_max_residuals(benchmark::State& state) {
  const Eigen::Index rows = state.range(0);
  const Matrix G = random_matrix(rows, 15, 3), P = random_matrix(15, 256, 4);
  const Vector h = Vector::Ones(rows);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(G, h, P));
}

template <auto Fn>
void BM_batch_contains(benchmark::State& state) {
  const Matrix A = random_matrix(64, 15, 5), P = random_matrix(15, state.range(0), 6);
  const Vector b = Vector::Ones(64);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(A, b, P, 1e-9));
}

template <auto Fn>
void BM_active_set(benchmark::State& state) {
  const Eigen::Index n = 4;
  Matrix A(2 * n + state.range(0), n);
  A << box_rows(n), random_matrix(state.range(0), n, 7);
  const Vector b = Vector::Ones(A.rows());
  for (auto _ : state) benchmark::DoNotOptimize(Fn(A, b, 1e-9));
}

template <auto Fn>
void BM_image_violation(benchmark::State& state) {
  const Matrix SA = box_rows(3), F = 0.5 * random_matrix(3, 3, 8);
  const Matrix X = random_matrix(3, state.range(0), 9), Dv = random_matrix(3, 8, 10);
  const Vector Sb = Vector::Ones(6);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(SA, Sb, F, X, Dv));
}

}  // namespace

BENCHMARK(BM_assemble<kernels::serial::assemble_consistency_rows>)->Name("assemble/serial")->Arg(600)->Arg(3000);
BENCHMARK(BM_assemble<kernels::parallel::assemble_consistency_rows>)->Name("assemble/parallel")->Arg(600)->Arg(3000);
BENCHMARK(BM_max_residuals<kernels::serial::max_residuals>)->Name("max_residuals/serial")->Arg(3600)->Arg(18000);
BENCHMARK(BM_max_residuals<kernels::parallel::max_residuals>)->Name("max_residuals/parallel")->Arg(3600)->Arg(18000);
BENCHMARK(BM_batch_contains<kernels::serial::batch_contains>)->Name("batch_contains/serial")->Arg(1000)->Arg(10000);
BENCHMARK(BM_batch_contains<kernels::parallel::batch_contains>)->Name("batch_contains/parallel")->Arg(1000)->Arg(10000);
BENCHMARK(BM_active_set<kernels::serial::active_set_candidates>)->Name("active_set/serial")->Arg(8)->Arg(16);
BENCHMARK(BM_active_set<kernels::parallel::active_set_candidates>)->Name("active_set/parallel")->Arg(8)->Arg(16);
BENCHMARK(BM_image_violation<kernels::serial::max_image_violation>)->Name("image_violation/serial")->Arg(64)->Arg(1024);
BENCHMARK(BM_image_violation<kernels::parallel::max_image_violation>)->Name("image_violation/parallel")->Arg(64)->Arg(1024);

BENCHMARK_MAIN();
