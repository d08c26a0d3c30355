#include "spectra/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "spectra/error.hpp"
#include "spectra/fft.hpp"

namespace spectra {
namespace {

std::vector<double> window_weights(std::size_t n, Window window) {
  std::vector<double> w(n, 1.0);
  if (window == Window::hann) {
    // Periodic Hann: the DFT-even form, exact zeros only at n = 0.
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n));
    }
  }
  return w;
}

}  // namespace

std::vector<double> magnitude_spectrum(std::span<const double> values, Window window) {
  const std::size_t n = values.size();
  const auto weights = window_weights(n, window);
  double gain = 0.0;
  std::vector<double> tapered(n);
  for (std::size_t i = 0; i < n; ++i) {
    tapered[i] = values[i] * weights[i];
    gain += weights[i];
  }

  const auto coeffs = fft_real(tapered);
  const std::size_t half = n / 2;
  std::vector<double> mags(half + 1);
  for (std::size_t b = 0; b <= half; ++b) {
    const bool edge = b == 0 || (n % 2 == 0 && b == half);
    mags[b] = (edge ? 1.0 : 2.0) * std::abs(coeffs[b]) / gain;
  }
  return mags;
}

std::vector<SpectrumBin> power_spectrum(const TimeSeries& series, Window window) {
  const auto mags = magnitude_spectrum(series.values(), window);
  const auto n = static_cast<double>(series.length());
  const double rate = series.sample_rate().value_or(1.0);
  std::vector<SpectrumBin> bins(mags.size());
  for (std::size_t b = 0; b < mags.size(); ++b) {
    bins[b] = {static_cast<double>(b) * rate / n, mags[b]};
  }
  return bins;
}

SpectralProfile select_dominant(std::span<const double> mags, std::size_t length, int top_k,
                                double floor) {
  if (top_k < 1) {
    throw Error(ErrorKind::config, fmt::format("top_k must be >= 1, got {}", top_k));
  }
  SpectralProfile profile;
  profile.top_k = top_k;
  profile.source_length = length;

  const std::size_t last = mags.size() - 1;
  for (std::size_t b = 1; b <= last; ++b) {
    const double m = mags[b];
    if (!(m > floor)) continue;
    // DC is not a neighbour: a mean offset must not suppress bin 1.
    if (b > 1 && m < mags[b - 1]) continue;
    if (b < last && m < mags[b + 1]) continue;
    profile.components.push_back(
        {static_cast<double>(b) / static_cast<double>(length), m});
  }

  std::sort(profile.components.begin(), profile.components.end(),
            [](const SpectralComponent& a, const SpectralComponent& b) {
              if (a.amplitude != b.amplitude) return a.amplitude > b.amplitude;
              return a.frequency < b.frequency;
            });
  if (profile.components.size() > static_cast<std::size_t>(top_k)) {
    profile.components.resize(static_cast<std::size_t>(top_k));
  }
  return profile;
}

SpectralProfile extract_dominant(const TimeSeries& series, int top_k, Window window) {
  if (top_k < 1) {
    throw Error(ErrorKind::config, fmt::format("top_k must be >= 1, got {}", top_k));
  }
  double peak = 0.0;
  for (double v : series.values()) peak = std::max(peak, std::abs(v));
  const auto mags = magnitude_spectrum(series.values(), window);
  auto profile = select_dominant(mags, series.length(), top_k, 1e-9 * peak);
  profile.sample_rate = series.sample_rate();
  return profile;
}

FrequencyBand FrequencyBand::make(double low, double high, double nyquist) {
  if (!(std::isfinite(low) && std::isfinite(high) && low >= 0.0 && low < high &&
        high <= nyquist)) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("invalid frequency band [{}, {}] (need 0 <= low < high <= {})", low,
                            high, nyquist));
  }
  return {low, high};
}

double interpolated_quantile(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(pos));
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(below);
  return sorted[below] + frac * (sorted[above] - sorted[below]);
}

FrequencyBand estimate_band(std::span<const SpectralProfile> profiles, BandMode mode) {
  if (mode.kind == BandMode::Kind::quantile &&
      !(mode.q_lo >= 0.0 && mode.q_lo < mode.q_hi && mode.q_hi <= 1.0)) {
    throw Error(ErrorKind::config,
                fmt::format("quantiles must satisfy 0 <= q_lo < q_hi <= 1, got ({}, {})",
                            mode.q_lo, mode.q_hi));
  }

  std::vector<double> pooled;
  std::size_t length = 0;
  for (const auto& p : profiles) {
    for (const auto& c : p.components) pooled.push_back(c.frequency);
    if (!p.degenerate()) length = std::max(length, p.source_length);
  }
  if (pooled.empty()) {
    throw Error(ErrorKind::insufficient_data,
                "no dominant frequencies to estimate a band from (empty or all-degenerate input)");
  }
  std::sort(pooled.begin(), pooled.end());

  double low = pooled.front();
  double high = pooled.back();
  if (mode.kind == BandMode::Kind::quantile) {
    low = interpolated_quantile(pooled, mode.q_lo);
    high = interpolated_quantile(pooled, mode.q_hi);
  }

  if (!(high > low)) {
    const double bin = length > 0 ? 1.0 / static_cast<double>(length) : 1.0 / 512.0;
    high = low + bin;
    if (high > 0.5) {
      high = 0.5;
      low = std::max(0.0, high - bin);
    }
  }
  return FrequencyBand::make(low, high);
}

nlohmann::ordered_json profile_to_json(const SpectralProfile& profile,
                                       const std::optional<FrequencyBand>& band) {
  const double scale = profile.sample_rate.value_or(1.0);
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["unit"] = profile.sample_rate ? "hz" : "normalized";
  if (profile.sample_rate) doc["sample_rate"] = *profile.sample_rate;
  doc["top_k"] = profile.top_k;
  doc["source_length"] = profile.source_length;
  auto comps = nlohmann::ordered_json::array();
  for (const auto& c : profile.components) {
    comps.push_back({{"f", c.frequency * scale}, {"a", c.amplitude}});
  }
  doc["components"] = std::move(comps);
  if (band) {
    doc["band"] = {{"low", band->low * scale}, {"high", band->high * scale}};
  } else {
    doc["band"] = nullptr;
  }
  return doc;
}

ProfileDocument profile_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != 1) {
      throw Error(ErrorKind::parse, "unsupported profile version");
    }
    ProfileDocument out;
    const auto unit = doc.at("unit").get<std::string>();
    if (unit == "hz") {
      out.profile.sample_rate = doc.at("sample_rate").get<double>();
    } else if (unit != "normalized") {
      throw Error(ErrorKind::parse, fmt::format("unknown frequency unit '{}'", unit));
    }
    const double scale = out.profile.sample_rate.value_or(1.0);
    out.profile.top_k = doc.at("top_k").get<int>();
    out.profile.source_length = doc.value("source_length", std::size_t{0});
    for (const auto& c : doc.at("components")) {
      out.profile.components.push_back(
          {c.at("f").get<double>() / scale, c.at("a").get<double>()});
    }
    if (doc.contains("band") && !doc["band"].is_null()) {
      out.band = FrequencyBand::make(doc["band"].at("low").get<double>() / scale,
                                     doc["band"].at("high").get<double>() / scale);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, fmt::format("malformed profile document: {}", e.what()));
  }
}

}  // namespace spectra
