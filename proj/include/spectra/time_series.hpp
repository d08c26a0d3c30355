#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace spectra {

inline constexpr std::size_t kMinSeriesLength = 4;

/// Fixed-length single-channel real sequence.
///
/// Construction validates length (>= 4) and finiteness; a TimeSeries that
/// exists is always valid. Without a sample rate, frequencies are in
/// cycles per sample.
class TimeSeries {
 public:
  explicit TimeSeries(std::vector<double> values,
                      std::optional<double> sample_rate = std::nullopt);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t length() const noexcept { return values_.size(); }
  std::optional<double> sample_rate() const noexcept { return sample_rate_; }

  /// Nyquist frequency in the series' own unit (0.5 when normalized).
  double nyquist() const noexcept { return sample_rate_ ? *sample_rate_ / 2.0 : 0.5; }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> values_;
  std::optional<double> sample_rate_;
};

}  // namespace spectra
