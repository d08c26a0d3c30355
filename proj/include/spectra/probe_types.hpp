#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spectra/spectral.hpp"
#include "spectra/time_series.hpp"

namespace spectra {

enum class Variant { seen, unseen };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);

enum class ClassificationMode { band_membership, median_bin };

std::string_view to_string(ClassificationMode m);
ClassificationMode classification_mode_from_string(std::string_view s);

struct ProbeSample {
  TimeSeries values;
  std::vector<double> freqs;
  std::vector<double> phases;
  std::vector<double> amps;
  double y_raw = 0.0;
  double y_norm = 0.0;
  int class_label = 0;
  Variant variant = Variant::seen;

  friend bool operator==(const ProbeSample&, const ProbeSample&) = default;
};

struct LabelStats {
  double mu_y = 0.0;
  double sigma_y = 1.0;

  double normalize(double y) const noexcept { return (y - mu_y) / sigma_y; }
  double denormalize(double z) const noexcept { return sigma_y * z + mu_y; }

  friend bool operator==(const LabelStats&, const LabelStats&) = default;
};

struct ProbeMetadata {
  std::uint64_t seed = 0;
  FrequencyBand seen_band;
  FrequencyBand unseen_band;
  double delta = 0.0;
  std::size_t length = 0;
  LabelStats label_stats;
  ClassificationMode classification_mode = ClassificationMode::median_bin;
  std::optional<double> class_threshold;  // median-bin mode only
  std::string config_hash;
  nlohmann::ordered_json config;  // snapshot of the generating ProbeConfig

  friend bool operator==(const ProbeMetadata&, const ProbeMetadata&) = default;
};

/// One variant's generated data, already split and labeled.
struct ProbeDataset {
  Variant variant = Variant::seen;
  std::vector<ProbeSample> train;
  std::vector<ProbeSample> val;
  std::vector<ProbeSample> test;
  ProbeMetadata meta;

  std::size_t size() const noexcept { return train.size() + val.size() + test.size(); }

  friend bool operator==(const ProbeDataset&, const ProbeDataset&) = default;
};

}  // namespace spectra
