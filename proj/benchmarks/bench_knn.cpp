#include <benchmark/benchmark.h>

#include "kcl/rng.hpp"
#include "kcl/sampler.hpp"

namespace {

kcl::EmbeddingMemory make_memory(int n, int dim, uint64_t seed) {
  kcl::Rng rng(seed);
  kcl::EmbeddingMemory mem;
  for (int i = 0; i < n; ++i) {
    kcl::Vector v(static_cast<size_t>(dim));
    for (double& x : v) x = rng.normal();
    mem.entries.emplace(i, std::move(v));
  }
  return mem;
}

void KnnSearch(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int dim = 32;
  const auto mem = make_memory(n, dim, 42);
  kcl::Rng rng(7);
  kcl::Vector query(static_cast<size_t>(dim));
  for (double& x : query) x = rng.normal();

  for (auto _ : state) {
    auto res = kcl::knn_search(mem, query, 100);
    benchmark::DoNotOptimize(res);
  }
  state.SetComplexityN(n);
}

}  // namespace

BENCHMARK(KnnSearch)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

BENCHMARK_MAIN();
