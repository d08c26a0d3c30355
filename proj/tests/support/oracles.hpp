#pragma once

// Test-only reference implementations, independent of the library code paths.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline std::vector<std::complex<long double>> brute_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<long double>> out(n);
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<long double> acc = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const long double angle = -two_pi * static_cast<long double>((k * t) % n) / static_cast<long double>(n);
      acc += static_cast<long double>(x[t]) * std::complex<long double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

/// Single-sided amplitude spectrum from the brute-force DFT.
inline std::vector<double> brute_magnitudes(const std::vector<double>& x) {
  const auto coeffs = brute_dft(x);
  const std::size_t n = x.size();
  std::vector<double> mags(n / 2 + 1);
  for (std::size_t b = 0; b <= n / 2; ++b) {
    const bool edge = b == 0 || (n % 2 == 0 && b == n / 2);
    mags[b] = static_cast<double>((edge ? 1.0L : 2.0L) * std::abs(coeffs[b]) / static_cast<long double>(n));
  }
  return mags;
}

/// Brute-force all-pairs AUC: ties count one half.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

inline std::vector<double> tones(std::size_t length, const std::vector<std::pair<double, double>>& freq_amp,
                                 double phase = 0.0) {
  std::vector<double> x(length, 0.0);
  for (std::size_t n = 0; n < length; ++n) {
    for (const auto& [f, a] : freq_amp) {
      x[n] += a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(n) + phase);
    }
  }
  return x;
}

}  // namespace oracle
