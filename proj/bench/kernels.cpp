// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include "cmvm/bench.hpp"
#include "cmvm/csd.hpp"
#include "cmvm/cse.hpp"
#include "cmvm/decompose.hpp"
#include "cmvm/verify.hpp"

namespace {

using namespace cmvm;

CsdTensor tensor_of(int m) { return matrix_to_tensor(normalize(random_matrix(m, 8, 1)).normalized); }

void BM_count_pairs_serial(benchmark::State& state) {
  const CsdTensor t = tensor_of(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(count_pairs_serial(t));
}

void BM_count_pairs_parallel(benchmark::State& state) {
  const CsdTensor t = tensor_of(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(count_pairs_parallel(t));
}

void BM_decompose(benchmark::State& state, bool parallel) {
  const Matrix m = normalize(random_matrix(static_cast<int>(state.range(0)), 8, 2)).normalized;
  for (auto _ : state) benchmark::DoNotOptimize(decompose(m, -1, parallel));
}

void BM_check_random(benchmark::State& state, bool parallel) {
  const Matrix m = random_matrix(static_cast<int>(state.range(0)), 8, 3);
  const Solution s = solve(m, BitWidthSpec{true, 8, 8});
  for (auto _ : state) benchmark::DoNotOptimize(check_random(s.graph, m, 10000, 1, {.parallel = parallel}));
}

} // namespace

BENCHMARK(BM_count_pairs_serial)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_count_pairs_parallel)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_decompose, serial, false)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_decompose, parallel, true)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_check_random, serial, false)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_check_random, parallel, true)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
