#include "spectra/time_series.hpp"

#include <cmath>

#include <fmt/core.h>

#include "spectra/error.hpp"

namespace spectra {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::config: return "config";
    case ErrorKind::parse: return "parse";
    case ErrorKind::length_mismatch: return "length-mismatch";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::too_small_corpus: return "too-small-corpus";
    case ErrorKind::io: return "io";
    case ErrorKind::infeasible_shift: return "infeasible-shift";
    case ErrorKind::zero_variance: return "zero-variance";
    case ErrorKind::degenerate_threshold: return "degenerate-threshold";
    case ErrorKind::incompatible_summaries: return "incompatible-summaries";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::undefined_auc: return "undefined-auc";
    case ErrorKind::bridge_protocol: return "bridge-protocol";
    case ErrorKind::bridge_timeout: return "bridge-timeout";
    case ErrorKind::bridge_dimension: return "bridge-dimension";
    case ErrorKind::bridge_process: return "bridge-process";
  }
  return "unknown";
}

TimeSeries::TimeSeries(std::vector<double> values, std::optional<double> sample_rate)
    : values_(std::move(values)), sample_rate_(sample_rate) {
  if (values_.size() < kMinSeriesLength) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("series length {} is below the minimum of {}", values_.size(),
                            kMinSeriesLength));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorKind::invalid_input, fmt::format("non-finite value at index {}", i));
    }
  }
  if (sample_rate_ && !(std::isfinite(*sample_rate_) && *sample_rate_ > 0.0)) {
    throw Error(ErrorKind::invalid_input, "sample rate must be a positive finite number");
  }
}

}  // namespace spectra
