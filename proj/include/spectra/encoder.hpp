#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spectra/bridge.hpp"
#include "spectra/spectral.hpp"
#include "spectra/time_series.hpp"

namespace spectra {

/// Frozen map from a series to a fixed-width embedding.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual std::string id() const = 0;
  virtual std::size_t embedding_dim(std::size_t length) const = 0;
  virtual std::vector<std::vector<double>> embed_batch(std::span<const TimeSeries> batch) = 0;
  /// Whether embed_batch may be called concurrently from several threads.
  virtual bool thread_safe() const { return true; }

  std::vector<double> embed(const TimeSeries& series);
};

/// Magnitudes of bins 1..floor(L/2); coordinate b-1 holds bin b.
class SpectralEncoder final : public Encoder {
 public:
  explicit SpectralEncoder(Window window = Window::rectangular) : window_(window) {}

  std::string id() const override;
  std::size_t embedding_dim(std::size_t length) const override { return length / 2; }
  std::vector<std::vector<double>> embed_batch(std::span<const TimeSeries> batch) override;

 private:
  Window window_;
};

/// Spectral embedding with every bin outside `band` zeroed.
///
/// Defaults to a Hann window: rectangular leakage from tones just above the
/// band would otherwise put their energy into the kept bins.
class BandLimitedEncoder final : public Encoder {
 public:
  explicit BandLimitedEncoder(FrequencyBand band, Window window = Window::hann)
      : band_(band), window_(window) {}

  std::string id() const override;
  std::size_t embedding_dim(std::size_t length) const override { return length / 2; }
  std::vector<std::vector<double>> embed_batch(std::span<const TimeSeries> batch) override;

  const FrequencyBand& band() const { return band_; }

 private:
  FrequencyBand band_;
  Window window_;
};

/// Fixed Gaussian projection, entries N(0, 1/L) drawn from (seed, L, row, col).
class RandomProjectionEncoder final : public Encoder {
 public:
  static constexpr std::size_t kDim = 128;

  explicit RandomProjectionEncoder(std::uint64_t seed = 0) : seed_(seed) {}

  std::string id() const override;
  std::size_t embedding_dim(std::size_t) const override { return kDim; }
  std::vector<std::vector<double>> embed_batch(std::span<const TimeSeries> batch) override;

 private:
  std::uint64_t seed_;
};

/// Delegates to an adapter over the bridge protocol, in chunks of `batch_limit`.
class ExternalEncoder final : public Encoder {
 public:
  explicit ExternalEncoder(BridgeEndpoint endpoint, std::size_t batch_limit = 64);

  std::string id() const override;
  std::size_t embedding_dim(std::size_t) const override { return client_.info().embedding_dim; }
  std::vector<std::vector<double>> embed_batch(std::span<const TimeSeries> batch) override;
  bool thread_safe() const override { return false; }

 private:
  BridgeEndpoint endpoint_;
  BridgeClient client_;
  std::size_t batch_limit_;
};

/// Parses a CLI encoder spec:
///   spectral | bandlimited:LOW,HIGH[,hann|rect] | randproj[:SEED]
///   | external:COMMAND | tcp:HOST:PORT
std::unique_ptr<Encoder> make_encoder(const std::string& spec, int timeout_ms = 30000);

}  // namespace spectra
