#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectra/time_series.hpp"

namespace spectra {

enum class Window { rectangular, hann };

struct SpectrumBin {
  double frequency;  // b/L, or b * sample_rate / L when the series has a rate
  double magnitude;
};

/// Single-sided amplitude spectrum over bins 0..floor(L/2).
///
/// Interior bins carry 2|X_b|/G and the DC/Nyquist bins |X_b|/G, where G is
/// the window's coherent gain sum (L for rectangular), so an on-bin
/// sinusoid of amplitude a reads as a.
std::vector<SpectrumBin> power_spectrum(const TimeSeries& series, Window window = Window::rectangular);

/// Magnitudes only, normalized frequency implied by index.
std::vector<double> magnitude_spectrum(std::span<const double> values,
                                       Window window = Window::rectangular);

struct SpectralComponent {
  double frequency;  // normalized cycles per sample, (0, 0.5]
  double amplitude;

  friend bool operator==(const SpectralComponent&, const SpectralComponent&) = default;
};

struct SpectralProfile {
  std::vector<SpectralComponent> components;  // descending amplitude, ties by frequency
  int top_k = 5;
  std::size_t source_length = 0;
  std::optional<double> sample_rate;

  bool degenerate() const noexcept { return components.empty(); }
};

inline constexpr int kDefaultTopK = 5;

/// Top-k local maxima of the magnitude spectrum, DC excluded.
///
/// A bin qualifies when its magnitude is >= each in-range non-DC neighbour
/// and above a relative floor of 1e-9 * max|x|, which discards round-off
/// peaks. Constant or all-zero input yields a degenerate (empty) profile.
SpectralProfile extract_dominant(const TimeSeries& series, int top_k = kDefaultTopK,
                                 Window window = Window::rectangular);

/// Same selection over a precomputed magnitude spectrum (bins 0..floor(L/2)).
SpectralProfile select_dominant(std::span<const double> magnitudes, std::size_t length, int top_k,
                                double floor);

/// Closed interval of normalized frequencies.
struct FrequencyBand {
  double low = 0.0;
  double high = 0.0;

  /// Validates 0 <= low < high <= nyquist.
  static FrequencyBand make(double low, double high, double nyquist = 0.5);

  double width() const noexcept { return high - low; }
  bool contains(double f) const noexcept { return f >= low && f <= high; }
  FrequencyBand shifted(double delta) const noexcept { return {low + delta, high + delta}; }

  friend bool operator==(const FrequencyBand&, const FrequencyBand&) = default;
};

struct BandMode {
  enum class Kind { minmax, quantile };
  Kind kind = Kind::quantile;
  double q_lo = 0.05;
  double q_hi = 0.95;

  static BandMode minmax() { return {Kind::minmax, 0.0, 1.0}; }
  static BandMode quantile(double lo, double hi) { return {Kind::quantile, lo, hi}; }
};

/// Empirical quantile with linear interpolation between order statistics
/// (position (n-1)q). `sorted` must be ascending and non-empty.
double interpolated_quantile(std::span<const double> sorted, double q);

/// Pools every dominant frequency and summarizes it as a band. A zero-width
/// result is widened by one DFT bin (1/L).
FrequencyBand estimate_band(std::span<const SpectralProfile> profiles, BandMode mode = {});

/// Versioned JSON: {"version":1,"unit":...,"top_k":...,"components":[{"f","a"}],"band":{...}}.
/// Frequencies are written in Hz when `sample_rate` is present.
nlohmann::ordered_json profile_to_json(const SpectralProfile& profile,
                                       const std::optional<FrequencyBand>& band);

struct ProfileDocument {
  SpectralProfile profile;
  std::optional<FrequencyBand> band;  // normalized
};

ProfileDocument profile_from_json(const nlohmann::json& doc);

}  // namespace spectra
