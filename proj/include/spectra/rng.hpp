#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace spectra {

/// SplitMix64 finalizer: a bijective 64-bit avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives a stream key from a root seed and a path of integer tags.
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

/// Counter-based generator: draw i is mix64(key, i), so a stream is fully
/// determined by its key and never depends on what other streams did.
///
/// Distributions are implemented here rather than through <random> so that
/// values are identical across standard library implementations.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept {
    return mix64(key_ ^ mix64(counter_++ + 0x632BE59BD9B4E019ULL));
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, bound) without modulo bias; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal via Box-Muller (one draw per call, the pair's cosine branch).
  double normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, CounterRng& rng);

}  // namespace spectra
