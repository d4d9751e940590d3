#include "kcl/rng.hpp"

#include <cmath>

#include "kcl/errors.hpp"

namespace kcl {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

uint64_t derive_seed(uint64_t master, std::string_view stream, uint64_t index) {
  uint64_t h = splitmix64(master ^ fnv1a(stream));
  return splitmix64(h ^ splitmix64(index + 0x51ed2701ull));
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // Box-Muller; u1 nudged away from zero so log() stays finite.
  double u1 = uniform();
  double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

int64_t Rng::uniform_int(int64_t n) {
  if (n <= 0) throw ValidationError("Rng::uniform_int: n must be positive");
  const uint64_t bound = static_cast<uint64_t>(n);
  const uint64_t threshold = (0ull - bound) % bound;
  for (;;) {
    uint64_t r = gen_();
    if (r >= threshold) return static_cast<int64_t>(r % bound);
  }
}

}  // namespace kcl
