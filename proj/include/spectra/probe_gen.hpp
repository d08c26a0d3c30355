#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectra/dataset_io.hpp"
#include "spectra/probe_types.hpp"
#include "spectra/rng.hpp"
#include "spectra/spectral.hpp"

namespace spectra {

struct ProbeConfig {
  FrequencyBand band{0.05, 0.20};  // seen band, normalized
  std::size_t n_samples = 1000;     // per variant
  std::size_t length = 512;
  int sinusoids = 5;
  double amp_min = 0.5;
  double amp_max = 1.5;
  double noise_sigma = 0.05;
  std::optional<double> delta;  // drawn when absent
  double f_max = 0.5;
  std::uint64_t seed = 0;
  SplitSpec split;
  ClassificationMode classification_mode = ClassificationMode::median_bin;
  /// Draw frequencies on DFT bins (b/L) with at least one empty bin between
  /// tones. Used for exact-recovery checks; off for ordinary probes.
  bool snap_to_bins = false;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static ProbeConfig from_json(const nlohmann::json& j);
  std::string hash() const;
};

/// Shift drawn uniformly on (width, f_max - high], which keeps the shifted
/// band strictly disjoint from the seen band and below f_max.
double sample_delta(const FrequencyBand& band, double f_max, CounterRng& rng);

/// Throws infeasible_shift unless width < delta <= f_max - high.
void check_delta(const FrequencyBand& band, double f_max, double delta);

FrequencyBand variant_band(const ProbeConfig& config, Variant variant, double delta);

/// Deterministic in (config.seed, variant, index) alone.
ProbeSample generate_sample(const ProbeConfig& config, Variant variant, double delta,
                            std::uint64_t index);

/// z-scores y_raw with population statistics of `train`, applied to all splits.
LabelStats make_regression_labels(std::vector<ProbeSample>& train, std::vector<ProbeSample>& val,
                                  std::vector<ProbeSample>& test);

/// Median of the train split's y_raw; needs at least two distinct values.
double median_threshold(const std::vector<ProbeSample>& train);

void make_classification_labels(ClassificationMode mode, ProbeDataset& seen, ProbeDataset& unseen);

struct ProbePair {
  ProbeDataset seen;
  ProbeDataset unseen;
};

ProbePair generate_probe_pair(const ProbeConfig& config);

}  // namespace spectra
