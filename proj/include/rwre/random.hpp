#pragma once

// Counter-style seeding and a small engine. Every random stream in the
// library is derived from (master seed, domain tag, integer key...) through
// the SplitMix64 finalizer, so results never depend on scheduling.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>

namespace rwre {

/// SplitMix64 output function (Steele, Lea, Flood).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Hash a sequence of 64-bit words into one seed. Order sensitive.
constexpr std::uint64_t hash_words(std::uint64_t seed,
                                   std::span<const std::int64_t> words) {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ull);
  for (std::int64_t w : words) {
    h = mix64(h + 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(w));
  }
  return h;
}

constexpr std::uint64_t hash_words(std::uint64_t seed,
                                   std::initializer_list<std::int64_t> words) {
  return hash_words(seed, std::span<const std::int64_t>(words.begin(), words.size()));
}

/// Seed domains keep environment, walker and auxiliary streams disjoint.
enum class SeedDomain : std::int64_t {
  environment = 0x454e56,
  walker = 0x57414c4b,
  sampler = 0x53414d50,
  synthetic = 0x53594e54,
};

constexpr std::uint64_t domain_seed(std::uint64_t master, SeedDomain domain,
                                    std::int64_t key) {
  return hash_words(master, {static_cast<std::int64_t>(domain), key});
}

/// xoshiro256** seeded through SplitMix64. Satisfies
/// UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t z = seed;
    for (auto& w : s_) {
      z += 0x9e3779b97f4a7c15ull;
      w = mix64(z);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method (no cached state).
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace rwre
