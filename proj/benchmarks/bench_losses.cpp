#include <benchmark/benchmark.h>

#include <cmath>

#include "kcl/losses.hpp"
#include "kcl/rng.hpp"

namespace {

kcl::Matrix unit_rows(int rows, int cols, uint64_t seed) {
  kcl::Rng rng(seed);
  kcl::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    double n2 = 0.0;
    for (int j = 0; j < cols; ++j) {
      m(i, j) = rng.normal();
      n2 += m(i, j) * m(i, j);
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (int j = 0; j < cols; ++j) m(i, j) *= inv;
  }
  return m;
}

void TripletLoss(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto z_t = unit_rows(n, 32, 1);
  const auto z_v = unit_rows(n, 32, 2);
  for (auto _ : state) {
    auto res = kcl::kcl_triplet_loss(z_t, z_v, 0.2);
    benchmark::DoNotOptimize(res);
  }
  state.SetComplexityN(n);
}

void SkpLoss(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int n = 50;
  kcl::Rng rng(3);
  kcl::Matrix logits(n, k), labels(n, k);
  for (auto& l : logits.data) l = rng.normal();
  for (auto& y : labels.data) y = rng.uniform() < 0.1 ? 1.0 : 0.0;
  for (auto _ : state) {
    auto res = kcl::skp_loss(logits, labels);
    benchmark::DoNotOptimize(res);
  }
  state.SetComplexityN(k);
}

}  // namespace

BENCHMARK(TripletLoss)->RangeMultiplier(2)->Range(8, 256)->Complexity();
BENCHMARK(SkpLoss)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

BENCHMARK_MAIN();
