#include <doctest.h>

#include <algorithm>
#include <set>

#include "spectra/dataset_io.hpp"
#include "spectra/error.hpp"
#include "spectra/probe_gen.hpp"
#include "temp_dir.hpp"

using namespace spectra;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected spectra::Error");
  return ErrorKind::invalid_input;
}

std::string row_of(std::size_t n, double v) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? "," : "") + std::to_string(v + static_cast<double>(i));
  return s + "\n";
}

}  // namespace

TEST_CASE("ucr-tsv keeps the label as metadata and the rest as values") {
  TempDir tmp;
  const auto path = tmp.write("uc.tsv", "1\t0.5\t-0.5\t0.25\t0.1\n-1\t1\t2\t3\t4\n");
  const auto corpus = load_corpus(path, CorpusFormat::ucr_tsv);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus.length() == 4);
  CHECK(corpus.labels == std::vector<std::string>{"1", "-1"});
  const auto v = corpus.series[0].values();
  CHECK(std::vector<double>(v.begin(), v.end()) == std::vector<double>{0.5, -0.5, 0.25, 0.1});
  CHECK(corpus.name == "uc");
}

TEST_CASE("ucr-tsv also accepts space-separated rows (older archive layout)") {
  TempDir tmp;
  const auto path = tmp.write("sp.txt", "  2.0000000e+00  1.0 2.0   3.0 4.0\r\n");
  const auto corpus = load_corpus(path, CorpusFormat::ucr_tsv);
  CHECK(corpus.labels.front() == "2.0000000e+00");
  CHECK(corpus.length() == 4);
}

TEST_CASE("csv rows with ragged lengths fail with the offending line") {
  TempDir tmp;
  const auto path = tmp.write("r.csv", row_of(512, 0) + "\n" + row_of(500, 1) + row_of(512, 2));
  try {
    load_corpus(path, CorpusFormat::csv_rows);
    FAIL("expected length mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::length_mismatch);
    CHECK(std::string(e.what()).find("offending lines: 3") != std::string::npos);
  }
}

TEST_CASE("non-numeric tokens report line and column") {
  TempDir tmp;
  const auto path = tmp.write("bad.csv", "1,2,3,4\n1, 2,abc,4\n");
  try {
    load_corpus(path, CorpusFormat::csv_rows);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find("line 2, column 6") != std::string::npos);
    CHECK(std::string(e.what()).find("'abc'") != std::string::npos);
  }
  const auto nan_path = tmp.write("nan.csv", "1,2,nan,4\n");
  CHECK(kind_of([&] { load_corpus(nan_path, CorpusFormat::csv_rows); }) == ErrorKind::parse);
}

TEST_CASE("ndjson corpora read the values field") {
  TempDir tmp;
  const auto path = tmp.write("c.ndjson", "{\"values\":[1,2,3,4],\"label\":\"a\"}\n{\"values\":[0,0,1,0]}\n");
  const auto corpus = load_corpus(path, CorpusFormat::ndjson);
  CHECK(corpus.size() == 2);
  CHECK(corpus.labels == std::vector<std::string>{"a"});
  const auto bad = tmp.write("b.ndjson", "{\"vals\":[1,2,3,4]}\n");
  CHECK(kind_of([&] { load_corpus(bad, CorpusFormat::ndjson); }) == ErrorKind::parse);
}

TEST_CASE("missing corpus files are I/O errors naming the path") {
  try {
    load_corpus("/nonexistent/thing.tsv", CorpusFormat::ucr_tsv);
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
    CHECK(std::string(e.what()).find("/nonexistent/thing.tsv") != std::string::npos);
  }
}

TEST_CASE("split sizes use floor arithmetic with the remainder to test") {
  const auto idx = split_indices(20, {}, 1);
  CHECK(idx.train.size() == 14);
  CHECK(idx.val.size() == 3);
  CHECK(idx.test.size() == 3);
  const auto ten = split_indices(10, {}, 1);
  CHECK(std::tuple(ten.train.size(), ten.val.size(), ten.test.size()) == std::tuple(7u, 1u, 2u));
}

TEST_CASE("split is deterministic in its seed") {
  const auto a = split_indices(100, {}, 42);
  const auto b = split_indices(100, {}, 42);
  const auto c = split_indices(100, {}, 43);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);
  CHECK(a.train != c.train);
}

TEST_CASE("property: split is a partition or a too-small error") {
  for (std::size_t n = 3; n <= 150; ++n) {
    for (std::uint64_t seed : {0ULL, 42ULL, 0xFFFFFFFFFFFFFFFFULL}) {
      SplitIndices idx;
      try {
        idx = split_indices(n, {}, seed);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::too_small_corpus);
        CHECK((static_cast<std::size_t>(n * 0.15) == 0 || n - static_cast<std::size_t>(n * 0.7) - static_cast<std::size_t>(n * 0.15) == 0));
        continue;
      }
      std::vector<std::size_t> all;
      for (const auto* part : {&idx.train, &idx.val, &idx.test}) all.insert(all.end(), part->begin(), part->end());
      std::sort(all.begin(), all.end());
      CAPTURE(n);
      REQUIRE(all.size() == n);
      for (std::size_t i = 0; i < n; ++i) CHECK(all[i] == i);
    }
  }
}

TEST_CASE("split of a corpus keeps labels aligned") {
  Corpus corpus;
  corpus.name = "c";
  for (int i = 0; i < 20; ++i) {
    corpus.series.emplace_back(std::vector<double>{double(i), 0, 0, 0});
    corpus.labels.push_back(std::to_string(i));
  }
  const auto [train, val, test] = split(corpus, {}, 9);
  CHECK(train.size() == 14);
  CHECK(val.size() == 3);
  CHECK(test.size() == 3);
  for (const auto* part : {&train, &val, &test}) {
    for (std::size_t i = 0; i < part->size(); ++i) {
      CHECK(part->labels[i] == std::to_string(static_cast<int>(part->series[i].values()[0])));
    }
  }
  CHECK(kind_of([&] { split(Corpus{}, {}, 0); }) == ErrorKind::too_small_corpus);
  CHECK(kind_of([] { SplitSpec{0.5, 0.5, 0.1}.validate(); }) == ErrorKind::config);
  CHECK(kind_of([] { SplitSpec{0.8, 0.2, 0.0}.validate(); }) == ErrorKind::config);
}

TEST_CASE("probe datasets round-trip bit-exactly and write deterministic bytes") {
  ProbeConfig config;
  config.n_samples = 40;
  config.length = 64;
  config.seed = 77;
  const auto pair = generate_probe_pair(config);

  TempDir tmp;
  const auto manifest = save_probe_dataset(pair.seen, tmp / "a");
  save_probe_dataset(pair.seen, tmp / "b");
  CHECK(manifest.filename() == "manifest.json");
  for (const char* f : {"train.ndjson", "val.ndjson", "test.ndjson", "manifest.json"}) {
    CHECK(std::filesystem::exists(tmp / "a" / f));
    CHECK(fnv1a_hex(read_file(tmp / "a" / f)) == fnv1a_hex(read_file(tmp / "b" / f)));
  }

  const auto loaded = load_probe_dataset(tmp / "a");
  CHECK(loaded == pair.seen);
  CHECK(loaded.meta.label_stats.sigma_y > 0.0);

  const auto doc = nlohmann::json::parse(read_file(manifest));
  CHECK(doc["version"] == 1);
  CHECK(doc["label_stats"]["sigma_y"].get<double>() > 0.0);
  CHECK(doc["config_hash"] == config.hash());
  CHECK(doc["delta"].get<double>() == pair.seen.meta.delta);

  const auto first_line = read_file(tmp / "a" / "train.ndjson").substr(0, read_file(tmp / "a" / "train.ndjson").find('\n'));
  const auto line = nlohmann::json::parse(first_line);
  for (const char* key : {"values", "y_raw", "y_norm", "class_label", "freqs", "variant"}) CHECK(line.contains(key));
}

TEST_CASE("saving into an unwritable location is an I/O error") {
  TempDir tmp;
  const auto blocker = tmp.write("file", "x");
  ProbeConfig config;
  config.n_samples = 20;
  config.length = 32;
  const auto pair = generate_probe_pair(config);
  CHECK(kind_of([&] { save_probe_dataset(pair.seen, blocker / "sub"); }) == ErrorKind::io);
  CHECK(kind_of([&] { load_probe_dataset(tmp / "missing"); }) == ErrorKind::io);
}

TEST_CASE("fnv1a matches the published test vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}
