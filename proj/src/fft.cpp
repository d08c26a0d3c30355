#include "spectra/fft.hpp"

#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace spectra {
namespace {

using cd = std::complex<double>;

void radix2_inplace(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles are computed directly instead of by repeated multiplication
    // so rounding error does not accumulate along the butterfly.
    std::vector<cd> twiddle(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(len);
      twiddle[k] = cd(std::cos(angle), std::sin(angle));
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cd u = a[i + k];
        const cd v = a[i + k + half] * twiddle[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

std::vector<cd> bluestein(std::span<const cd> x) {
  const std::size_t n = x.size();
  const std::size_t m = std::bit_ceil(2 * n - 1);

  // chirp[k] = exp(-i pi k^2 / n); k^2 is reduced mod 2n to keep the angle small.
  std::vector<cd> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto k2 = static_cast<double>((k * k) % (2 * n));
    const double angle = -std::numbers::pi * k2 / static_cast<double>(n);
    chirp[k] = cd(std::cos(angle), std::sin(angle));
  }

  std::vector<cd> a(m), b(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    b[k] = std::conj(chirp[k]);
    b[m - k] = std::conj(chirp[k]);
  }

  radix2_inplace(a, false);
  radix2_inplace(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  radix2_inplace(a, true);

  std::vector<cd> out(n);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
  return out;
}

}  // namespace

std::vector<cd> fft(std::span<const cd> input) {
  if (input.empty()) return {};
  if (std::has_single_bit(input.size())) {
    std::vector<cd> a(input.begin(), input.end());
    radix2_inplace(a, false);
    return a;
  }
  return bluestein(input);
}

std::vector<cd> fft_real(std::span<const double> input) {
  std::vector<cd> z(input.begin(), input.end());
  return fft(z);
}

}  // namespace spectra
