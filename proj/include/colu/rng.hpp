#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace colu {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ seeded through splitmix64.
///
/// All randomness in the library (initialization, shuffling, dropout masks,
/// augmentation, synthetic data) goes through this generator, so a run is a
/// pure function of its seed on any platform. The standard library engines
/// are avoided because std::*_distribution output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  // Independent stream for a given purpose; `stream` distinguishes consumers
  // sharing one run seed.
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed;
    const std::uint64_t mixed = splitmix64(sm) ^ (stream * 0xD1B54A32D192ED03ULL);
    reseed(mixed);
  }

  void reseed(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n) by 128-bit multiply-high (Lemire, no rejection).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates, high index to low.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  const std::uint64_t* state() const { return s_; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4] = {};
};

// Stream tags for Rng(seed, stream).
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kShuffle = 2;
inline constexpr std::uint64_t kDropout = 3;
inline constexpr std::uint64_t kAugment = 4;
inline constexpr std::uint64_t kSubset = 5;
inline constexpr std::uint64_t kSynthetic = 6;
}  // namespace streams

}  // namespace colu
