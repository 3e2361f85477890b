#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "botstack/ops.hpp"

namespace {

std::vector<double> filled(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> a = filled(n * n, 1), b = filled(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    botstack::kernels::gemm(false, false, n, n, n, 1.0, a.data(), n, b.data(), n, 0.0, c.data(), n);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Gemm)->RangeMultiplier(2)->Range(16, 256);

// batch x in times in x out, the shape of a dense layer step
void BM_GemmDense(benchmark::State& state) {
  const std::size_t batch = 128, in = static_cast<std::size_t>(state.range(0)), out = 64;
  const std::vector<double> x = filled(batch * in, 3), w = filled(in * out, 4);
  std::vector<double> y(batch * out);
  for (auto _ : state) {
    botstack::kernels::gemm(false, false, batch, out, in, 1.0, x.data(), in, w.data(), out, 0.0, y.data(), out);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_GemmDense)->Arg(55)->Arg(196);

void BM_Logistic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> v = filled(n, 5), out(n);
  for (auto _ : state) {
    botstack::kernels::logistic(v.data(), out.data(), n);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_Logistic)->Arg(256)->Arg(8192);

}  // namespace

BENCHMARK_MAIN();
