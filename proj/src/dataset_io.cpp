#include "spectra/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "spectra/error.hpp"
#include "spectra/rng.hpp"

namespace spectra {
namespace fs = std::filesystem;

std::string_view to_string(Variant v) { return v == Variant::seen ? "seen" : "unseen"; }

Variant variant_from_string(std::string_view s) {
  if (s == "seen") return Variant::seen;
  if (s == "unseen") return Variant::unseen;
  throw Error(ErrorKind::parse, fmt::format("unknown variant '{}'", s));
}

std::string_view to_string(ClassificationMode m) {
  return m == ClassificationMode::band_membership ? "membership" : "median-bin";
}

ClassificationMode classification_mode_from_string(std::string_view s) {
  if (s == "membership" || s == "band-membership") return ClassificationMode::band_membership;
  if (s == "median-bin") return ClassificationMode::median_bin;
  throw Error(ErrorKind::config, fmt::format("unknown classification mode '{}'", s));
}

CorpusFormat corpus_format_from_string(std::string_view s) {
  if (s == "csv-rows") return CorpusFormat::csv_rows;
  if (s == "ucr-tsv") return CorpusFormat::ucr_tsv;
  if (s == "ndjson") return CorpusFormat::ndjson;
  throw Error(ErrorKind::config, fmt::format("unknown corpus format '{}'", s));
}

void SplitSpec::validate() const {
  if (!(train_frac > 0.0 && val_frac > 0.0 && test_frac > 0.0) ||
      std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-12) {
    throw Error(ErrorKind::config,
                fmt::format("split fractions must be positive and sum to 1, got {}/{}/{}",
                            train_frac, val_frac, test_frac));
  }
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line, CorpusFormat format) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  if (format == CorpusFormat::csv_rows) {
    while (i <= line.size()) {
      std::size_t end = line.find(',', i);
      if (end == std::string_view::npos) end = line.size();
      std::size_t b = i, e = end;
      while (b < e && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
      while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1]))) --e;
      tokens.push_back({line.substr(b, e - b), b + 1});
      i = end + 1;
    }
    return tokens;
  }
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t end = i;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    tokens.push_back({line.substr(i, end - i), i + 1});
    i = end;
  }
  return tokens;
}

double parse_number(const Token& tok, std::size_t line_no) {
  std::string_view text = tok.text;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    throw Error(ErrorKind::parse, fmt::format("line {}, column {}: non-numeric token '{}'",
                                              line_no, tok.column, tok.text));
  }
  return value;
}

bool blank(std::string_view line) {
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Corpus load_corpus(const fs::path& path, CorpusFormat format, std::optional<double> sample_rate) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::io, fmt::format("cannot open corpus file '{}'", path.string()));
  }

  Corpus corpus;
  corpus.name = path.stem().string();
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;

    std::vector<double> values;
    if (format == CorpusFormat::ndjson) {
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
        for (const auto& v : obj.at("values")) values.push_back(v.get<double>());
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, fmt::format("line {}: {}", line_no, e.what()));
      }
      if (obj.contains("label")) {
        corpus.labels.push_back(obj["label"].is_string() ? obj["label"].get<std::string>()
                                                         : obj["label"].dump());
      }
    } else {
      auto tokens = tokenize(line, format);
      std::size_t first = 0;
      if (format == CorpusFormat::ucr_tsv) {
        corpus.labels.emplace_back(tokens.front().text);
        first = 1;
      }
      values.reserve(tokens.size() - first);
      for (std::size_t t = first; t < tokens.size(); ++t) {
        values.push_back(parse_number(tokens[t], line_no));
      }
    }
    rows.push_back(std::move(values));
    row_lines.push_back(line_no);
  }

  if (rows.empty()) {
    throw Error(ErrorKind::insufficient_data,
                fmt::format("corpus file '{}' contains no series", path.string()));
  }

  const std::size_t expected = rows.front().size();
  std::vector<std::size_t> offenders;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != expected) offenders.push_back(row_lines[r]);
  }
  if (!offenders.empty()) {
    std::string list;
    for (std::size_t i = 0; i < offenders.size() && i < 20; ++i) {
      list += (i ? ", " : "") + std::to_string(offenders[i]);
    }
    if (offenders.size() > 20) list += fmt::format(", ... ({} total)", offenders.size());
    throw Error(ErrorKind::length_mismatch,
                fmt::format("series length mismatch: expected {} values (line {}), offending "
                            "lines: {}",
                            expected, row_lines.front(), list));
  }

  corpus.series.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    try {
      corpus.series.emplace_back(std::move(rows[r]), sample_rate);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("line {}: {}", row_lines[r], e.what()));
    }
  }
  return corpus;
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train_frac));
  const auto val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val_frac));
  if (train == 0 || val == 0 || train + val >= n) {
    throw Error(ErrorKind::too_small_corpus,
                fmt::format("{} series cannot fill a {}/{}/{} split with non-empty parts", n,
                            spec.train_frac, spec.val_frac, spec.test_frac));
  }
  CounterRng rng(derive_key(seed, {0x5B117ULL}));
  const auto order = permutation(n, rng);
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(train),
                 order.begin() + static_cast<std::ptrdiff_t>(train + val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train + val), order.end());
  return out;
}

std::tuple<Corpus, Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec,
                                         std::uint64_t seed) {
  if (corpus.series.empty()) {
    throw Error(ErrorKind::too_small_corpus, "cannot split an empty corpus");
  }
  const auto idx = split_indices(corpus.size(), spec, seed);
  auto take = [&](const std::vector<std::size_t>& which, std::string_view suffix) {
    Corpus part;
    part.name = corpus.name + std::string(suffix);
    part.origin = corpus.origin;
    for (std::size_t i : which) {
      part.series.push_back(corpus.series[i]);
      if (!corpus.labels.empty()) part.labels.push_back(corpus.labels[i]);
    }
    return part;
  };
  return {take(idx.train, ".train"), take(idx.val, ".val"), take(idx.test, ".test")};
}

nlohmann::ordered_json sample_to_json(const ProbeSample& s) {
  const auto v = s.values.values();
  nlohmann::ordered_json line;
  line["values"] = std::vector<double>(v.begin(), v.end());
  line["y_raw"] = s.y_raw;
  line["y_norm"] = s.y_norm;
  line["class_label"] = s.class_label;
  line["freqs"] = s.freqs;
  line["variant"] = to_string(s.variant);
  line["amps"] = s.amps;
  line["phases"] = s.phases;
  return line;
}

ProbeSample sample_from_json(const nlohmann::json& line) {
  ProbeSample s{TimeSeries(line.at("values").get<std::vector<double>>()), {}, {}, {}};
  s.y_raw = line.at("y_raw").get<double>();
  s.y_norm = line.at("y_norm").get<double>();
  s.class_label = line.at("class_label").get<int>();
  s.freqs = line.at("freqs").get<std::vector<double>>();
  s.variant = variant_from_string(line.at("variant").get<std::string>());
  s.amps = line.value("amps", std::vector<double>{});
  s.phases = line.value("phases", std::vector<double>{});
  return s;
}

namespace {

nlohmann::ordered_json band_json(const FrequencyBand& b) {
  return {{"low", b.low}, {"high", b.high}};
}

FrequencyBand band_from(const nlohmann::ordered_json& j) {
  return {j.at("low").get<double>(), j.at("high").get<double>()};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, fmt::format("cannot write '{}'", path.string()));
  out << content;
  out.close();
  if (!out) throw Error(ErrorKind::io, fmt::format("failed writing '{}'", path.string()));
}

void write_split(const fs::path& path, const std::vector<ProbeSample>& samples) {
  std::string content;
  for (const auto& s : samples) {
    content += sample_to_json(s).dump();
    content += '\n';
  }
  write_file(path, content);
}

std::vector<ProbeSample> read_split(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, fmt::format("cannot open '{}'", path.string()));
  std::vector<ProbeSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      samples.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::parse,
                  fmt::format("{} line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return samples;
}

}  // namespace

fs::path save_probe_dataset(const ProbeDataset& ds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::io,
                fmt::format("cannot create directory '{}': {}", dir.string(), ec.message()));
  }

  write_split(dir / "train.ndjson", ds.train);
  write_split(dir / "val.ndjson", ds.val);
  write_split(dir / "test.ndjson", ds.test);

  const auto& m = ds.meta;
  nlohmann::ordered_json manifest;
  manifest["version"] = 1;
  manifest["variant"] = to_string(ds.variant);
  manifest["seed"] = m.seed;
  manifest["length"] = m.length;
  manifest["seen_band"] = band_json(m.seen_band);
  manifest["unseen_band"] = band_json(m.unseen_band);
  manifest["delta"] = m.delta;
  manifest["label_stats"] = {{"mu_y", m.label_stats.mu_y}, {"sigma_y", m.label_stats.sigma_y}};
  manifest["classification"] = {{"mode", to_string(m.classification_mode)}};
  if (m.class_threshold) manifest["classification"]["threshold"] = *m.class_threshold;
  manifest["counts"] = {{"train", ds.train.size()}, {"val", ds.val.size()}, {"test", ds.test.size()}};
  manifest["config_hash"] = m.config_hash;
  manifest["config"] = m.config;

  const auto path = dir / "manifest.json";
  write_file(path, manifest.dump(2) + "\n");
  return path;
}

ProbeDataset load_probe_dataset(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) {
    throw Error(ErrorKind::io, fmt::format("no manifest.json in '{}'", dir.string()));
  }
  ProbeDataset ds;
  try {
    const auto manifest = nlohmann::ordered_json::parse(in);
    if (manifest.at("version").get<int>() != 1) {
      throw Error(ErrorKind::parse, "unsupported manifest version");
    }
    ds.variant = variant_from_string(manifest.at("variant").get<std::string>());
    auto& m = ds.meta;
    m.seed = manifest.at("seed").get<std::uint64_t>();
    m.length = manifest.at("length").get<std::size_t>();
    m.seen_band = band_from(manifest.at("seen_band"));
    m.unseen_band = band_from(manifest.at("unseen_band"));
    m.delta = manifest.at("delta").get<double>();
    m.label_stats = {manifest.at("label_stats").at("mu_y").get<double>(),
                     manifest.at("label_stats").at("sigma_y").get<double>()};
    const auto& cls = manifest.at("classification");
    m.classification_mode = classification_mode_from_string(cls.at("mode").get<std::string>());
    if (cls.contains("threshold")) m.class_threshold = cls["threshold"].get<double>();
    m.config_hash = manifest.at("config_hash").get<std::string>();
    m.config = manifest.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse,
                fmt::format("malformed manifest in '{}': {}", dir.string(), e.what()));
  }
  ds.train = read_split(dir / "train.ndjson");
  ds.val = read_split(dir / "val.ndjson");
  ds.test = read_split(dir / "test.ndjson");
  return ds;
}

}  // namespace spectra
