#include "spectra/overlap.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "spectra/error.hpp"

namespace spectra {

std::string_view to_string(OverlapVerdict v) {
  switch (v) {
    case OverlapVerdict::high: return "high";
    case OverlapVerdict::moderate: return "moderate";
    case OverlapVerdict::low: return "low";
  }
  return "low";
}

std::size_t histogram_bin(double f, std::size_t bins) {
  const double pos = f / 0.5 * static_cast<double>(bins);
  const double idx = std::ceil(pos) - 1.0;
  return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(bins - 1)));
}

CorpusSpectralSummary summarize_corpus(const Corpus& corpus, int top_k, std::size_t bins,
                                       BandMode mode) {
  if (corpus.series.empty()) {
    throw Error(ErrorKind::insufficient_data, "cannot summarize an empty corpus");
  }
  if (bins < 1) throw Error(ErrorKind::config, "histogram needs at least one bin");

  CorpusSpectralSummary s;
  s.name = corpus.name;
  s.n_series = corpus.size();
  s.top_k = top_k;
  s.source_length = corpus.length();
  s.sample_rate = corpus.series.front().sample_rate();
  s.band_mode = mode;
  s.histogram.assign(bins, 0.0);

  std::vector<SpectralProfile> profiles;
  profiles.reserve(corpus.size());
  std::vector<double> mean_spectrum;
  double peak = 0.0;
  for (const auto& series : corpus.series) {
    profiles.push_back(extract_dominant(series, top_k));
    if (profiles.back().degenerate()) ++s.n_degenerate;
    const auto mags = magnitude_spectrum(series.values());
    if (mean_spectrum.empty()) mean_spectrum.assign(mags.size(), 0.0);
    for (std::size_t b = 0; b < mags.size(); ++b) mean_spectrum[b] += mags[b];
    for (double v : series.values()) peak = std::max(peak, std::abs(v));
  }

  s.band = estimate_band(profiles, mode);

  std::size_t pooled = 0;
  for (const auto& p : profiles) {
    for (const auto& c : p.components) {
      s.histogram[histogram_bin(c.frequency, bins)] += 1.0;
      ++pooled;
    }
  }
  for (auto& m : s.histogram) m /= static_cast<double>(pooled);

  const auto count = static_cast<double>(corpus.size());
  for (auto& m : mean_spectrum) m /= count;
  s.components = select_dominant(mean_spectrum, s.source_length, top_k, 1e-9 * peak).components;
  return s;
}

double band_iou(const FrequencyBand& a, const FrequencyBand& b) {
  const double inter = std::max(0.0, std::min(a.high, b.high) - std::max(a.low, b.low));
  const double uni = a.width() + b.width() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

OverlapReport spectral_overlap(const CorpusSpectralSummary& a, const CorpusSpectralSummary& b) {
  if (a.sample_rate.has_value() != b.sample_rate.has_value() ||
      (a.sample_rate && *a.sample_rate != *b.sample_rate)) {
    throw Error(ErrorKind::incompatible_summaries,
                "summaries use different frequency units or sample rates");
  }
  if (a.histogram.size() != b.histogram.size()) {
    throw Error(ErrorKind::incompatible_summaries,
                fmt::format("histogram bin counts differ ({} vs {})", a.histogram.size(),
                            b.histogram.size()));
  }
  OverlapReport r;
  r.band_iou = band_iou(a.band, b.band);
  // Dividing by the mean total mass (1 up to rounding) makes self-overlap
  // exactly 1 and keeps the score symmetric.
  double overlap = 0.0, mass_a = 0.0, mass_b = 0.0;
  for (std::size_t i = 0; i < a.histogram.size(); ++i) {
    overlap += std::min(a.histogram[i], b.histogram[i]);
    mass_a += a.histogram[i];
    mass_b += b.histogram[i];
  }
  const double mass = 0.5 * (mass_a + mass_b);
  r.histogram_overlap = mass > 0.0 ? std::clamp(overlap / mass, 0.0, 1.0) : 0.0;
  r.verdict = r.histogram_overlap >= 0.5   ? OverlapVerdict::high
              : r.histogram_overlap < 0.2 ? OverlapVerdict::low
                                          : OverlapVerdict::moderate;
  return r;
}

nlohmann::ordered_json summary_to_json(const CorpusSpectralSummary& s) {
  SpectralProfile profile;
  profile.components = s.components;
  profile.top_k = s.top_k;
  profile.source_length = s.source_length;
  profile.sample_rate = s.sample_rate;
  auto doc = profile_to_json(profile, s.band);
  doc["name"] = s.name;
  doc["n_series"] = s.n_series;
  doc["n_degenerate"] = s.n_degenerate;
  if (s.band_mode.kind == BandMode::Kind::minmax) {
    doc["band_mode"] = {{"kind", "minmax"}};
  } else {
    doc["band_mode"] = {{"kind", "quantile"}, {"q_lo", s.band_mode.q_lo}, {"q_hi", s.band_mode.q_hi}};
  }
  const double nyquist = s.sample_rate ? *s.sample_rate / 2.0 : 0.5;
  doc["histogram"] = {{"bins", s.histogram.size()}, {"f_max", nyquist}, {"mass", s.histogram}};
  return doc;
}

CorpusSpectralSummary summary_from_json(const nlohmann::json& j) {
  const auto base = profile_from_json(j);
  if (!base.band) throw Error(ErrorKind::parse, "summary document has no band");
  CorpusSpectralSummary s;
  s.band = *base.band;
  s.components = base.profile.components;
  s.top_k = base.profile.top_k;
  s.source_length = base.profile.source_length;
  s.sample_rate = base.profile.sample_rate;
  try {
    s.name = j.value("name", std::string{});
    s.n_series = j.value("n_series", std::size_t{0});
    s.n_degenerate = j.value("n_degenerate", std::size_t{0});
    if (j.contains("band_mode") && j["band_mode"].at("kind") == "minmax") {
      s.band_mode = BandMode::minmax();
    } else if (j.contains("band_mode")) {
      s.band_mode = BandMode::quantile(j["band_mode"].at("q_lo").get<double>(),
                                       j["band_mode"].at("q_hi").get<double>());
    }
    if (j.contains("histogram")) {
      s.histogram = j["histogram"].at("mass").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, fmt::format("malformed summary document: {}", e.what()));
  }
  return s;
}

nlohmann::ordered_json overlap_to_json(const OverlapReport& r) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["band_iou"] = r.band_iou;
  doc["histogram_overlap"] = r.histogram_overlap;
  doc["verdict"] = to_string(r.verdict);
  doc["verdict_note"] = "heuristic cutoffs on histogram_overlap: high >= 0.5, low < 0.2";
  return doc;
}

std::string overlap_svg(const CorpusSpectralSummary& a, const CorpusSpectralSummary& b,
                        const OverlapReport& report) {
  constexpr double width = 640, panel = 200, margin = 40, gap = 50;
  const double height = 2 * panel + gap + 2 * margin;
  const double plot_w = width - 2 * margin;
  const double nyquist = a.sample_rate ? *a.sample_rate / 2.0 : 0.5;
  const char* unit = a.sample_rate ? "Hz" : "cycles/sample";

  double peak = 0.0;
  for (double m : a.histogram) peak = std::max(peak, m);
  for (double m : b.histogram) peak = std::max(peak, m);
  if (peak <= 0.0) peak = 1.0;

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      width, height);
  svg += fmt::format(
      "<text x=\"{:.0f}\" y=\"20\">band IoU {:.4f}, histogram overlap {:.4f} ({} - heuristic)</text>\n",
      margin, report.band_iou, report.histogram_overlap, to_string(report.verdict));

  auto draw_panel = [&](const CorpusSpectralSummary& s, double top, const char* colour,
                        const std::string& title) {
    const double base = top + panel;
    const std::size_t bins = s.histogram.size();
    const double bar_w = plot_w / static_cast<double>(bins);
    svg += fmt::format("<text x=\"{:.0f}\" y=\"{:.1f}\">{}</text>\n", margin, top - 6, title);
    svg += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" "
        "fill-opacity=\"0.15\"/>\n",
        margin + s.band.low / 0.5 * plot_w, top, (s.band.high - s.band.low) / 0.5 * plot_w, panel,
        colour);
    for (std::size_t i = 0; i < bins; ++i) {
      const double h = s.histogram[i] / peak * panel;
      if (h <= 0.0) continue;
      svg += fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
          margin + static_cast<double>(i) * bar_w, base - h, bar_w, h, colour);
    }
    svg += fmt::format(
        "<line x1=\"{:.0f}\" y1=\"{:.2f}\" x2=\"{:.0f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n",
        margin, base, margin + plot_w, base);
    for (int t = 0; t <= 5; ++t) {
      const double x = margin + plot_w * t / 5.0;
      svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.3g}</text>\n",
                         x, base + 14, nyquist * t / 5.0);
    }
  };
  draw_panel(a, margin + 10, "#1f77b4",
             fmt::format("A: {} ({} series, dominant-frequency mass)", a.name, a.n_series));
  draw_panel(b, margin + 10 + panel + gap, "#d62728",
             fmt::format("B: {} ({} series, dominant-frequency mass)", b.name, b.n_series));
  svg += fmt::format("<text x=\"{:.0f}\" y=\"{:.0f}\" text-anchor=\"middle\">frequency ({})</text>\n",
                     width / 2, height - 6, unit);
  svg += "</svg>\n";
  return svg;
}

}  // namespace spectra
