#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace satsense {

/// SplitMix64 finalizer. Used to derive statistically independent child
/// seeds from a parent seed and a tag, so that every scene, channel and drop
/// pattern can be regenerated from (base seed, path of tags) alone.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept {
  return mix_seed(base ^ mix_seed(tag));
}

template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, Tags... rest) noexcept {
  return derive_seed(derive_seed(base, tag), static_cast<std::uint64_t>(rest)...);
}

/// Seeded random source. Wraps mt19937_64 and remembers the seed it was
/// constructed with so results can carry their provenance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64& engine() noexcept { return engine_; }

  double uniform(double lo, double hi);
  double normal();
  std::size_t index(std::size_t n);
  bool bernoulli(double p);
  std::uint64_t next_seed() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace satsense
