#pragma once

#include <complex>
#include <span>
#include <vector>

namespace spectra {

/// Forward DFT, X_b = sum_n x_n exp(-2 pi i b n / N), for any N >= 1.
///
/// Powers of two use an in-place iterative radix-2 transform; other lengths
/// go through Bluestein's chirp-z reformulation on a padded power of two.
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> input);

std::vector<std::complex<double>> fft_real(std::span<const double> input);

}  // namespace spectra
