#include "spectra/probe_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "spectra/error.hpp"
#include "spectra/parallel.hpp"

namespace spectra {
namespace {

constexpr std::uint64_t kDeltaStream = 0xDE17AULL;
constexpr std::uint64_t kSplitStream = 0x5B11ULL;

std::uint64_t variant_tag(Variant v) { return v == Variant::seen ? 1 : 2; }

// Picks m bins from [lo, hi] with no two adjacent, uniformly over all such
// sets: choose m distinct slots among (count - m + 1) and spread them out.
std::vector<std::size_t> draw_spaced_bins(std::size_t lo, std::size_t hi, std::size_t m,
                                          CounterRng& rng) {
  const std::size_t slots = hi - lo + 1 - (m - 1);
  std::vector<std::size_t> pool(slots);
  for (std::size_t i = 0; i < slots; ++i) pool[i] = i;
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(slots - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  for (std::size_t i = 0; i < m; ++i) pool[i] += lo + i;
  return pool;
}

struct BinRange {
  std::size_t lo, hi;
  std::size_t count() const { return hi >= lo ? hi - lo + 1 : 0; }
};

// Interior bins (excluding DC and Nyquist) whose frequency lies in the band.
BinRange band_bins(const FrequencyBand& band, std::size_t length) {
  const auto n = static_cast<double>(length);
  auto lo = static_cast<std::size_t>(std::max(1.0, std::ceil(band.low * n - 1e-9)));
  const double top = std::floor(band.high * n + 1e-9);
  const std::size_t max_interior = (length - 1) / 2;
  auto hi = static_cast<std::size_t>(std::min(top, static_cast<double>(max_interior)));
  if (top < 1.0) hi = 0;
  return {lo, hi};
}

void check_snap_feasible(const ProbeConfig& config, const FrequencyBand& band) {
  const auto m = static_cast<std::size_t>(config.sinusoids);
  const auto bins = band_bins(band, config.length);
  if (bins.count() < 2 * m - 1) {
    throw Error(ErrorKind::config,
                fmt::format("band [{}, {}] holds {} usable bins at L={}, need {} for {} spaced "
                            "tones",
                            band.low, band.high, bins.count(), config.length, 2 * m - 1, m));
  }
}

}  // namespace

void ProbeConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
  if (!(f_max > 0.0 && f_max <= 0.5)) fail(fmt::format("f_max must lie in (0, 0.5], got {}", f_max));
  if (!(band.low >= 0.0 && band.low < band.high && band.high <= f_max)) {
    fail(fmt::format("seen band [{}, {}] must satisfy 0 <= low < high <= f_max ({})", band.low,
                     band.high, f_max));
  }
  if (n_samples < 1) fail("n_samples must be >= 1");
  if (length < kMinSeriesLength) fail(fmt::format("length must be >= {}", kMinSeriesLength));
  if (sinusoids < 1) fail("sinusoids per sample must be >= 1");
  if (!(amp_min > 0.0 && amp_min <= amp_max && std::isfinite(amp_max))) {
    fail(fmt::format("amplitude range ({}, {}) must be positive with min <= max", amp_min, amp_max));
  }
  if (!(noise_sigma >= 0.0 && std::isfinite(noise_sigma))) fail("noise_sigma must be >= 0");
  split.validate();
  if (delta) check_delta(band, f_max, *delta);

  if (snap_to_bins) check_snap_feasible(*this, band);
}

nlohmann::ordered_json ProbeConfig::to_json() const {
  nlohmann::ordered_json j;
  j["band"] = {{"low", band.low}, {"high", band.high}};
  j["n_samples"] = n_samples;
  j["length"] = length;
  j["sinusoids"] = sinusoids;
  j["amplitude_range"] = {amp_min, amp_max};
  j["noise_sigma"] = noise_sigma;
  j["delta"] = delta ? nlohmann::ordered_json(*delta) : nlohmann::ordered_json(nullptr);
  j["f_max"] = f_max;
  j["seed"] = seed;
  j["split"] = {split.train_frac, split.val_frac, split.test_frac};
  j["classification_mode"] = to_string(classification_mode);
  j["snap_to_bins"] = snap_to_bins;
  return j;
}

ProbeConfig ProbeConfig::from_json(const nlohmann::json& j) {
  ProbeConfig c;
  try {
    c.band = {j.at("band").at("low").get<double>(), j.at("band").at("high").get<double>()};
    c.n_samples = j.at("n_samples").get<std::size_t>();
    c.length = j.at("length").get<std::size_t>();
    c.sinusoids = j.at("sinusoids").get<int>();
    c.amp_min = j.at("amplitude_range").at(0).get<double>();
    c.amp_max = j.at("amplitude_range").at(1).get<double>();
    c.noise_sigma = j.at("noise_sigma").get<double>();
    if (!j.at("delta").is_null()) c.delta = j["delta"].get<double>();
    c.f_max = j.at("f_max").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.split = {j.at("split").at(0).get<double>(), j.at("split").at(1).get<double>(),
               j.at("split").at(2).get<double>()};
    c.classification_mode =
        classification_mode_from_string(j.at("classification_mode").get<std::string>());
    c.snap_to_bins = j.value("snap_to_bins", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, fmt::format("malformed probe config: {}", e.what()));
  }
  return c;
}

std::string ProbeConfig::hash() const { return fnv1a_hex(to_json().dump()); }

void check_delta(const FrequencyBand& band, double f_max, double delta) {
  const double width = band.width();
  const double headroom = f_max - band.high;
  if (!(delta > width)) {
    throw Error(ErrorKind::infeasible_shift,
                fmt::format("shift {:.6g} does not clear the band width {:.6g}; shifted band would "
                            "overlap the seen band",
                            delta, width));
  }
  if (delta > headroom) {
    throw Error(ErrorKind::infeasible_shift,
                fmt::format("shift {:.6g} exceeds headroom {:.6g} (f_max {:.6g} - high {:.6g}); deficit {:.6g}",
                            delta, headroom, f_max, band.high, delta - headroom));
  }
}

double sample_delta(const FrequencyBand& band, double f_max, CounterRng& rng) {
  const double width = band.width();
  const double headroom = f_max - band.high;
  if (!(headroom > width)) {
    throw Error(ErrorKind::infeasible_shift,
                fmt::format("no room for a disjoint shifted band: headroom {:.6g} (f_max {:.6g} - "
                            "high {:.6g}) vs band width {:.6g}; deficit {:.6g}",
                            headroom, f_max, band.high, width, width - headroom));
  }
  // 1 - u lies in (0, 1], so delta lies in (width, headroom].
  return width + (headroom - width) * (1.0 - rng.uniform());
}

FrequencyBand variant_band(const ProbeConfig& config, Variant variant, double delta) {
  return variant == Variant::seen ? config.band : config.band.shifted(delta);
}

ProbeSample generate_sample(const ProbeConfig& config, Variant variant, double delta,
                            std::uint64_t index) {
  const FrequencyBand band = variant_band(config, variant, delta);
  const auto m = static_cast<std::size_t>(config.sinusoids);
  CounterRng rng(derive_key(config.seed, {variant_tag(variant), index}));

  std::vector<double> freqs(m);
  if (config.snap_to_bins) {
    const auto bins = band_bins(band, config.length);
    const auto picked = draw_spaced_bins(bins.lo, bins.hi, m, rng);
    for (std::size_t j = 0; j < m; ++j) {
      freqs[j] = static_cast<double>(picked[j]) / static_cast<double>(config.length);
    }
  } else {
    for (auto& f : freqs) f = rng.uniform(band.low, band.high);
  }
  std::vector<double> phases(m), amps(m);
  for (auto& p : phases) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (auto& a : amps) a = rng.uniform(config.amp_min, config.amp_max);

  std::vector<double> values(config.length);
  for (std::size_t n = 0; n < config.length; ++n) {
    double x = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      x += amps[j] * std::sin(2.0 * std::numbers::pi * freqs[j] * static_cast<double>(n) + phases[j]);
    }
    if (config.noise_sigma > 0.0) x += config.noise_sigma * rng.normal();
    values[n] = x;
  }

  double y = 0.0;
  for (double f : freqs) y += f;

  ProbeSample s{TimeSeries(std::move(values)), std::move(freqs), std::move(phases), std::move(amps)};
  s.y_raw = y;
  s.variant = variant;
  return s;
}

LabelStats make_regression_labels(std::vector<ProbeSample>& train, std::vector<ProbeSample>& val,
                                  std::vector<ProbeSample>& test) {
  if (train.empty()) {
    throw Error(ErrorKind::insufficient_data, "regression labels need a non-empty train split");
  }
  const auto n = static_cast<double>(train.size());
  double mean = 0.0;
  for (const auto& s : train) mean += s.y_raw;
  mean /= n;
  double var = 0.0;
  for (const auto& s : train) var += (s.y_raw - mean) * (s.y_raw - mean);
  var /= n;
  const double sigma = std::sqrt(var);
  if (!(sigma > 0.0) || sigma <= 1e-12 * std::max(1.0, std::abs(mean))) {
    throw Error(ErrorKind::zero_variance, "train split labels are constant; cannot z-score");
  }
  const LabelStats stats{mean, sigma};
  for (auto* split : {&train, &val, &test}) {
    for (auto& s : *split) s.y_norm = stats.normalize(s.y_raw);
  }
  return stats;
}

double median_threshold(const std::vector<ProbeSample>& train) {
  std::vector<double> ys;
  ys.reserve(train.size());
  for (const auto& s : train) ys.push_back(s.y_raw);
  std::sort(ys.begin(), ys.end());
  if (ys.empty() || ys.front() == ys.back()) {
    throw Error(ErrorKind::degenerate_threshold,
                "median binning needs at least two distinct train labels");
  }
  const std::size_t mid = ys.size() / 2;
  return ys.size() % 2 ? ys[mid] : 0.5 * (ys[mid - 1] + ys[mid]);
}

void make_classification_labels(ClassificationMode mode, ProbeDataset& seen,
                                ProbeDataset& unseen) {
  for (auto* ds : {&seen, &unseen}) {
    ds->meta.classification_mode = mode;
    std::optional<double> threshold;
    if (mode == ClassificationMode::median_bin) threshold = median_threshold(ds->train);
    ds->meta.class_threshold = threshold;
    for (auto* split : {&ds->train, &ds->val, &ds->test}) {
      for (auto& s : *split) {
        s.class_label = threshold ? (s.y_raw > *threshold ? 1 : 0)
                                  : (ds->variant == Variant::unseen ? 1 : 0);
      }
    }
  }
}

ProbePair generate_probe_pair(const ProbeConfig& config) {
  config.validate();
  double delta = 0.0;
  if (config.delta) {
    delta = *config.delta;
  } else {
    CounterRng rng(derive_key(config.seed, {kDeltaStream}));
    delta = sample_delta(config.band, config.f_max, rng);
  }
  if (config.snap_to_bins) check_snap_feasible(config, config.band.shifted(delta));

  const std::size_t n = config.n_samples;
  std::vector<std::optional<ProbeSample>> generated(2 * n);
  parallel_for(2 * n, [&](std::size_t i) {
    const Variant v = i < n ? Variant::seen : Variant::unseen;
    generated[i] = generate_sample(config, v, delta, i % n);
  });

  ProbeMetadata meta;
  meta.seed = config.seed;
  meta.seen_band = config.band;
  meta.unseen_band = config.band.shifted(delta);
  meta.delta = delta;
  meta.length = config.length;
  meta.config = config.to_json();
  meta.config_hash = config.hash();

  auto assemble = [&](Variant v, std::size_t offset) {
    ProbeDataset ds;
    ds.variant = v;
    ds.meta = meta;
    const auto idx = split_indices(n, config.split, derive_key(config.seed, {kSplitStream, variant_tag(v)}));
    auto take = [&](const std::vector<std::size_t>& which, std::vector<ProbeSample>& out) {
      out.reserve(which.size());
      for (std::size_t i : which) out.push_back(std::move(*generated[offset + i]));
    };
    take(idx.train, ds.train);
    take(idx.val, ds.val);
    take(idx.test, ds.test);
    ds.meta.label_stats = make_regression_labels(ds.train, ds.val, ds.test);
    return ds;
  };

  ProbePair pair{assemble(Variant::seen, 0), assemble(Variant::unseen, n)};
  make_classification_labels(config.classification_mode, pair.seen, pair.unseen);
  return pair;
}

}  // namespace spectra
