#include "spectra/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace spectra {

std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = mix64(seed);
  for (std::uint64_t tag : path) {
    key = mix64(key ^ mix64(tag + 0xD1B54A32D192ED03ULL));
  }
  return key;
}

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = next_u64();
  while (x >= limit) {
    x = next_u64();
  }
  return x % bound;
}

double CounterRng::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> permutation(std::size_t n, CounterRng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace spectra
