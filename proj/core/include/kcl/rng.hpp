#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace kcl {

// Derives an independent stream seed from a master seed, a stream tag and an
// optional index (e.g. the epoch). Streams for corpus generation, parameter
// init, anchor sampling and batch shuffling are kept isolated so that paired
// runs can change one factor without perturbing the others.
uint64_t derive_seed(uint64_t master, std::string_view stream, uint64_t index = 0);

// Deterministic RNG. All draw methods are hand-rolled on top of the
// mt19937_64 bit stream (which the standard pins down exactly), so sequences
// are reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; second value cached.
  double normal();

  // Unbiased integer in [0, n). n must be positive.
  int64_t uniform_int(int64_t n);

  // In-place Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
      int64_t j = uniform_int(i + 1);
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
    }
  }

  // k distinct values uniformly from items, order randomized.
  template <typename T>
  std::vector<T> choose(std::vector<T> items, size_t k) {
    // partial Fisher-Yates: first k slots end up a uniform sample
    const size_t n = items.size();
    for (size_t i = 0; i < k && i + 1 < n; ++i) {
      size_t j = i + static_cast<size_t>(uniform_int(static_cast<int64_t>(n - i)));
      std::swap(items[i], items[j]);
    }
    items.resize(k < n ? k : n);
    return items;
  }

 private:
  std::mt19937_64 gen_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace kcl
