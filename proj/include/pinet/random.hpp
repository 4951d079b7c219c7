#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pinet {

/// splitmix64 finalizer; used to derive independent replicate seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a sequence of keys into one seed. Order-sensitive.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto k : keys) h = mix64(h ^ mix64(k));
  return h;
}

/// Thin wrapper over std::mt19937_64. Distributions are computed from raw
/// engine bits so that streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pinet
