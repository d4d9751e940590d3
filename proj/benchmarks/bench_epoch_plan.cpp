#include <benchmark/benchmark.h>

#include "kcl/corpus.hpp"
#include "kcl/rng.hpp"
#include "kcl/sampler.hpp"

namespace {

void EpochPlan(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<kcl::Sample> corpus(static_cast<size_t>(n));
  kcl::EmbeddingMemory memory;
  kcl::Rng rng(11);
  for (int i = 0; i < n; ++i) {
    corpus[static_cast<size_t>(i)].id = i;
    corpus[static_cast<size_t>(i)].video_feat = {0.0, 0.0};
    corpus[static_cast<size_t>(i)].caption = {0};
    kcl::Vector v(32);
    for (double& x : v) x = rng.normal();
    memory.entries.emplace(i, std::move(v));
  }
  kcl::SamplerConfig cfg;
  cfg.batch_size = 50;
  cfg.seed = 9;

  int epoch = 1;
  for (auto _ : state) {
    auto plan = kcl::build_epoch_plan(corpus, memory, {}, {}, cfg, epoch++);
    benchmark::DoNotOptimize(plan);
  }
  state.SetComplexityN(n);
}

}  // namespace

BENCHMARK(EpochPlan)->RangeMultiplier(2)->Range(1 << 10, 1 << 14)->Complexity();

BENCHMARK_MAIN();
