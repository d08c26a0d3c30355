#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spectra/dataset_io.hpp"
#include "spectra/spectral.hpp"

namespace spectra {

inline constexpr std::size_t kDefaultHistogramBins = 64;

/// Pooled dominant-frequency picture of a corpus.
struct CorpusSpectralSummary {
  std::string name;
  FrequencyBand band;              // normalized
  std::vector<double> histogram;   // equal-width bins over (0, 0.5], mass sums to 1
  std::size_t n_series = 0;
  std::size_t n_degenerate = 0;
  int top_k = kDefaultTopK;
  std::size_t source_length = 0;
  std::optional<double> sample_rate;            // set when the corpus was analyzed in Hz
  std::vector<SpectralComponent> components;    // dominant peaks of the corpus-mean spectrum
  BandMode band_mode;
};

/// Index of the (lo, hi] bin containing normalized frequency f.
std::size_t histogram_bin(double f, std::size_t bins);

CorpusSpectralSummary summarize_corpus(const Corpus& corpus, int top_k = kDefaultTopK,
                                       std::size_t bins = kDefaultHistogramBins,
                                       BandMode mode = {});

enum class OverlapVerdict { high, moderate, low };
std::string_view to_string(OverlapVerdict v);

struct OverlapReport {
  double band_iou = 0.0;
  double histogram_overlap = 0.0;  // sum_i min(p_i, q_i)
  OverlapVerdict verdict = OverlapVerdict::low;
};

/// Interval measure |a ∩ b| / |a ∪ b|.
double band_iou(const FrequencyBand& a, const FrequencyBand& b);

/// Symmetric in its arguments. Verdict cutoffs on histogram_overlap are
/// heuristic: high >= 0.5, low < 0.2.
OverlapReport spectral_overlap(const CorpusSpectralSummary& a, const CorpusSpectralSummary& b);

nlohmann::ordered_json summary_to_json(const CorpusSpectralSummary& s);
CorpusSpectralSummary summary_from_json(const nlohmann::json& j);

nlohmann::ordered_json overlap_to_json(const OverlapReport& r);

/// Two stacked histogram panels (a on top, b below) sharing a frequency axis.
std::string overlap_svg(const CorpusSpectralSummary& a, const CorpusSpectralSummary& b,
                        const OverlapReport& report);

}  // namespace spectra
