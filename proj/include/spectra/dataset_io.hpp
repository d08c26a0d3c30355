#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "spectra/probe_types.hpp"
#include "spectra/time_series.hpp"

namespace spectra {

enum class CorpusOrigin { real, generated_seen, generated_unseen };

struct Corpus {
  std::vector<TimeSeries> series;
  std::vector<std::string> labels;  // ucr-tsv class labels, empty otherwise
  std::string name;
  CorpusOrigin origin = CorpusOrigin::real;

  std::size_t size() const noexcept { return series.size(); }
  std::size_t length() const noexcept { return series.empty() ? 0 : series.front().length(); }
};

enum class CorpusFormat { csv_rows, ucr_tsv, ndjson };

CorpusFormat corpus_format_from_string(std::string_view s);

struct SplitSpec {
  double train_frac = 0.70;
  double val_frac = 0.15;
  double test_frac = 0.15;

  /// Throws a config error unless every fraction is > 0 and they sum to 1.
  void validate() const;
};

/// Reads one series per line. Fails on ragged lengths (listing the offending
/// lines) and on non-numeric tokens (with line and column).
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   std::optional<double> sample_rate = std::nullopt);

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

/// Seeded shuffle then contiguous slicing: floor(N*train), floor(N*val), rest.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec, std::uint64_t seed);

std::tuple<Corpus, Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec,
                                         std::uint64_t seed);

/// Writes train/val/test.ndjson and manifest.json into `dir` (created if
/// needed). Returns the manifest path.
std::filesystem::path save_probe_dataset(const ProbeDataset& dataset,
                                         const std::filesystem::path& dir);

ProbeDataset load_probe_dataset(const std::filesystem::path& dir);

nlohmann::ordered_json sample_to_json(const ProbeSample& sample);
ProbeSample sample_from_json(const nlohmann::json& line);

/// 64-bit FNV-1a, hex encoded. Used for config and input hashes.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace spectra
