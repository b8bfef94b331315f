// SPDX-License-Identifier: Apache-2.0
//
// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.
#include <array>
#include <vector>

#include <benchmark/benchmark.h>

#include "distilforge/kernels.hpp"
#include "distilforge/losses.hpp"
#include "distilforge/rng.hpp"

using namespace distilforge;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

template <bool Parallel>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 1), b = random_vector(n * n, 2);
  std::vector<double> out(n * n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::matmul(a, b, out, n, n, n);
    else
      kernels::serial::matmul(a, b, out, n, n, n);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <bool Parallel>
void BM_PairwiseL2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 64;
  const auto e = random_vector(n * d, 3);
  std::vector<double> out(n * n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::pairwise_l2(e, out, n, d);
    else
      kernels::serial::pairwise_l2(e, out, n, d);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_AngleCosines(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 64;
  const auto e = random_vector(n * d, 4);
  const TupleSets t = TupleSets::build(n, 5);
  std::vector<double> out(t.triples.size());
  std::vector<char> valid(t.triples.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::angle_cosines(e, d, t.triples, 1e-8, out, valid);
    else
      kernels::serial::angle_cosines(e, d, t.triples, 1e-8, out, valid);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.triples.size()));
}

}  // namespace

BENCHMARK(BM_Matmul<false>)->Name("matmul/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Matmul<true>)->Name("matmul/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_PairwiseL2<false>)->Name("pairwise_l2/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_PairwiseL2<true>)->Name("pairwise_l2/parallel")->Arg(128)->Arg(512);
BENCHMARK(BM_AngleCosines<false>)->Name("angle_cosines/serial")->Arg(16)->Arg(128);
BENCHMARK(BM_AngleCosines<true>)->Name("angle_cosines/parallel")->Arg(16)->Arg(128);

BENCHMARK_MAIN();
