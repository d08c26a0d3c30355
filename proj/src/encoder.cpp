#include "spectra/encoder.hpp"

#include <charconv>
#include <cmath>

#include <fmt/core.h>

#include "spectra/error.hpp"
#include "spectra/rng.hpp"

namespace spectra {

std::vector<double> Encoder::embed(const TimeSeries& series) {
  return embed_batch(std::span<const TimeSeries>(&series, 1)).front();
}

namespace {

std::string window_name(Window w) { return w == Window::hann ? "hann" : "rect"; }

std::vector<double> nonzero_bins(const TimeSeries& s, Window window) {
  auto mags = magnitude_spectrum(s.values(), window);
  return {mags.begin() + 1, mags.end()};
}

double parse_double(std::string_view text, const std::string& spec) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::config, fmt::format("bad number '{}' in encoder spec '{}'", text, spec));
  }
  return v;
}

}  // namespace

std::string SpectralEncoder::id() const { return fmt::format("spectral[{}]", window_name(window_)); }

std::vector<std::vector<double>> SpectralEncoder::embed_batch(std::span<const TimeSeries> batch) {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const auto& s : batch) out.push_back(nonzero_bins(s, window_));
  return out;
}

std::string BandLimitedEncoder::id() const {
  return fmt::format("bandlimited[{},{},{}]", band_.low, band_.high, window_name(window_));
}

std::vector<std::vector<double>> BandLimitedEncoder::embed_batch(std::span<const TimeSeries> batch) {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const auto& s : batch) {
    auto e = nonzero_bins(s, window_);
    const auto n = static_cast<double>(s.length());
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!band_.contains(static_cast<double>(i + 1) / n)) e[i] = 0.0;
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string RandomProjectionEncoder::id() const { return fmt::format("randproj[{}]", seed_); }

std::vector<std::vector<double>> RandomProjectionEncoder::embed_batch(
    std::span<const TimeSeries> batch) {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  std::size_t cached_length = 0;
  std::vector<double> matrix;
  for (const auto& s : batch) {
    const std::size_t n = s.length();
    if (n != cached_length) {
      matrix.resize(kDim * n);
      const double scale = 1.0 / std::sqrt(static_cast<double>(n));
      for (std::size_t r = 0; r < kDim; ++r) {
        CounterRng rng(derive_key(seed_, {n, r}));
        for (std::size_t c = 0; c < n; ++c) matrix[r * n + c] = scale * rng.normal();
      }
      cached_length = n;
    }
    const auto x = s.values();
    std::vector<double> e(kDim, 0.0);
    for (std::size_t r = 0; r < kDim; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += matrix[r * n + c] * x[c];
      e[r] = acc;
    }
    out.push_back(std::move(e));
  }
  return out;
}

ExternalEncoder::ExternalEncoder(BridgeEndpoint endpoint, std::size_t batch_limit)
    : endpoint_(endpoint), client_(std::move(endpoint)), batch_limit_(std::max<std::size_t>(1, batch_limit)) {
  client_.handshake();
}

std::string ExternalEncoder::id() const {
  if (endpoint_.transport == BridgeEndpoint::Transport::tcp) {
    return fmt::format("external[tcp:{}:{}]", endpoint_.host, endpoint_.port);
  }
  return fmt::format("external[{}]", endpoint_.launch_command);
}

std::vector<std::vector<double>> ExternalEncoder::embed_batch(std::span<const TimeSeries> batch) {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (std::size_t start = 0; start < batch.size(); start += batch_limit_) {
    const auto count = std::min(batch_limit_, batch.size() - start);
    auto part = client_.embed_batch(batch.subspan(start, count));
    for (auto& v : part) out.push_back(std::move(v));
  }
  return out;
}

std::unique_ptr<Encoder> make_encoder(const std::string& spec, int timeout_ms) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (kind == "spectral" && rest.empty()) return std::make_unique<SpectralEncoder>();
  if (kind == "bandlimited") {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      auto comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      parts.push_back(rest.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (parts.size() < 2 || parts.size() > 3) {
      throw Error(ErrorKind::config,
                  fmt::format("encoder spec '{}' must be bandlimited:LOW,HIGH[,hann|rect]", spec));
    }
    Window w = Window::hann;
    if (parts.size() == 3) {
      if (parts[2] == "rect") w = Window::rectangular;
      else if (parts[2] != "hann") throw Error(ErrorKind::config, fmt::format("unknown window '{}'", parts[2]));
    }
    return std::make_unique<BandLimitedEncoder>(
        FrequencyBand::make(parse_double(parts[0], spec), parse_double(parts[1], spec)), w);
  }
  if (kind == "randproj") {
    std::uint64_t seed = 0;
    if (!rest.empty()) {
      const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), seed);
      if (ec != std::errc{} || ptr != rest.data() + rest.size()) {
        throw Error(ErrorKind::config, fmt::format("bad seed in encoder spec '{}'", spec));
      }
    }
    return std::make_unique<RandomProjectionEncoder>(seed);
  }
  if (kind == "external" && !rest.empty()) {
    return std::make_unique<ExternalEncoder>(BridgeEndpoint::child_process(rest, timeout_ms));
  }
  if (kind == "tcp") {
    const auto last = rest.rfind(':');
    if (last == std::string::npos || last == 0) {
      throw Error(ErrorKind::config, fmt::format("encoder spec '{}' must be tcp:HOST:PORT", spec));
    }
    unsigned port = 0;
    const std::string port_text = rest.substr(last + 1);
    const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port == 0 || port > 65535) {
      throw Error(ErrorKind::config, fmt::format("bad port in encoder spec '{}'", spec));
    }
    return std::make_unique<ExternalEncoder>(
        BridgeEndpoint::tcp(rest.substr(0, last), static_cast<std::uint16_t>(port), timeout_ms));
  }
  throw Error(ErrorKind::config, fmt::format("unknown encoder spec '{}'", spec));
}

}  // namespace spectra
