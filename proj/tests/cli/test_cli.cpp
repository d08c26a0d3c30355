#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <fmt/core.h>

#include "oracles.hpp"
#include "process.hpp"
#include "spectra/overlap.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = SPECTRA_CLI_PATH;

CommandResult spectra_cli(const std::string& args, const std::string& env = "") {
  return run_command((env.empty() ? "" : env + " ") + "'" + kCli + "' " + args);
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

// UCR-style corpus of on-bin multi-tone series inside [low_bin, high_bin] / len.
fs::path write_corpus(const TempDir& dir, const std::string& name, int low_bin, int high_bin,
                      std::size_t len = 256, int count = 30) {
  std::mt19937_64 gen(static_cast<std::uint64_t>(low_bin) * 7919 + high_bin);
  std::uniform_int_distribution<int> bin(low_bin, high_bin);
  std::ostringstream out;
  for (int i = 0; i < count; ++i) {
    const auto x = oracle::tones(len, {{bin(gen) / double(len), 1.0}, {bin(gen) / double(len), 0.7}});
    out << (i % 2);
    for (double v : x) out << '\t' << fmt::format("{:.17g}", v);
    out << '\n';
  }
  return dir.write(name, out.str());
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

fs::path analyzed_profile(const TempDir& dir, int low_bin = 13, int high_bin = 51) {
  const auto corpus = write_corpus(dir, "corpus.tsv", low_bin, high_bin);
  const auto profile = dir / "profile.json";
  const auto r = spectra_cli("analyze --input " + quoted(corpus) + " --format ucr-tsv --band minmax --out " +
                             quoted(profile));
  REQUIRE(r.exit_code == 0);
  return profile;
}

}  // namespace

TEST_CASE("analyze writes a profile with a populated band and a run manifest") {
  TempDir dir;
  const auto corpus = write_corpus(dir, "forda.tsv", 13, 51);
  const auto r = spectra_cli("analyze --input " + quoted(corpus) + " --format ucr-tsv --band minmax --out " +
                             quoted(dir / "prof.json"));
  REQUIRE(r.exit_code == 0);
  const auto prof = read_json(dir / "prof.json");
  const double low = prof["band"]["low"].get<double>(), high = prof["band"]["high"].get<double>();
  CHECK(low >= 13.0 / 256 - 1e-12);
  CHECK(high <= 51.0 / 256 + 1e-12);
  CHECK(high - low > 0.1);
  CHECK(prof["n_series"] == 30);
  CHECK(prof["unit"] == "normalized");
  const auto manifest = read_json(dir / "prof.run.json");
  CHECK(manifest["command"] == "analyze");
  CHECK(manifest["tool_version"] == "0.1.0");
  CHECK(manifest["inputs"].contains(corpus.string()));
  CHECK(manifest["outputs"][0] == (dir / "prof.json").string());
  CHECK(manifest.contains("duration_ms"));
}

TEST_CASE("analyze reports input errors with exit code 2") {
  TempDir dir;
  auto r = spectra_cli("analyze --input " + quoted(dir / "missing.tsv") + " --out " + quoted(dir / "p.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("missing.tsv") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  CHECK_FALSE(fs::exists(dir / "p.json"));

  const auto corpus = write_corpus(dir, "c.tsv", 10, 20);
  r = spectra_cli("analyze --input " + quoted(corpus) + " --format ucr-tsv --top-k 0 --out " +
                  quoted(dir / "p.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("top_k") != std::string::npos);

  r = spectra_cli("analyze --input " + quoted(corpus) + " --format parquet --out " + quoted(dir / "p.json"));
  CHECK(r.exit_code == 2);
  r = spectra_cli("analyze --input " + quoted(corpus) + " --frobnicate --out " + quoted(dir / "p.json"));
  CHECK(r.exit_code == 2);
  const auto bad = dir.write("bad.csv", "1,2,3,4\n1,2,x,4\n");
  r = spectra_cli("analyze --input " + quoted(bad) + " --out " + quoted(dir / "p.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("line 2, column 5") != std::string::npos);
}

TEST_CASE("analyze in Hz records the unit") {
  TempDir dir;
  const auto corpus = write_corpus(dir, "c.tsv", 10, 20);
  const auto r = spectra_cli("analyze --input " + quoted(corpus) + " --format ucr-tsv --sample-rate 256 --band minmax --out " +
                             quoted(dir / "p.json"));
  REQUIRE(r.exit_code == 0);
  const auto prof = read_json(dir / "p.json");
  CHECK(prof["unit"] == "hz");
  CHECK(prof["band"]["low"].get<double>() == doctest::Approx(10.0));
  CHECK(prof["band"]["high"].get<double>() == doctest::Approx(20.0));
}

TEST_CASE("generate writes both variants with defaults from the experiment setup") {
  TempDir dir;
  const auto profile = analyzed_profile(dir);
  const auto r = spectra_cli("generate --profile " + quoted(profile) + " --n 200 --seed 4 --out " +
                             quoted(dir / "probe"));
  REQUIRE(r.exit_code == 0);
  for (const char* variant : {"seen", "unseen"}) {
    const auto m = read_json(dir / "probe" / variant / "manifest.json");
    CHECK(m["length"] == 512);
    CHECK(m["config"]["sinusoids"] == 5);
    CHECK(m["counts"]["train"] == 140);
    CHECK(m["counts"]["val"] == 30);
    CHECK(m["counts"]["test"] == 30);
    CHECK(m["variant"] == variant);
  }
  const auto run = read_json(dir / "probe" / "run_manifest.json");
  CHECK(run["command"] == "generate");
  CHECK(run["outputs"].size() == 8);
  CHECK(run["config"]["probe"]["seed"] == 4);
}

TEST_CASE("generate is byte-identical for a fixed seed, across runs and thread counts") {
  TempDir dir;
  const auto profile = analyzed_profile(dir);
  const std::string args = "generate --profile " + quoted(profile) + " --n 300 --seed 11 --out ";
  REQUIRE(spectra_cli(args + quoted(dir / "a"), "SPECTRA_THREADS=1").exit_code == 0);
  REQUIRE(spectra_cli(args + quoted(dir / "b"), "SPECTRA_THREADS=8").exit_code == 0);
  REQUIRE(spectra_cli(args + quoted(dir / "c"), "SPECTRA_THREADS=8").exit_code == 0);
  const auto a = read_tree(dir / "a");
  CHECK(a.size() == 9);
  CHECK(a == read_tree(dir / "b"));
  CHECK(a == read_tree(dir / "c"));
  REQUIRE(spectra_cli("generate --profile " + quoted(profile) + " --n 300 --seed 12 --out " + quoted(dir / "d"))
              .exit_code == 0);
  CHECK(a.at("seen/train.ndjson") != read_tree(dir / "d").at("seen/train.ndjson"));
}

TEST_CASE("generate reports infeasible shifts with exit code 3") {
  TempDir dir;
  const auto profile = analyzed_profile(dir);
  auto r = spectra_cli("generate --profile " + quoted(profile) + " --delta 0.4 --out " + quoted(dir / "x"));
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("deficit") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "x"));

  // A band reaching past the middle of the spectrum leaves no headroom at all.
  const auto wide = analyzed_profile(dir, 20, 110);
  r = spectra_cli("generate --profile " + quoted(wide) + " --out " + quoted(dir / "y"));
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("deficit") != std::string::npos);
}

TEST_CASE("overlap of a profile with itself is one, disjoint profiles zero") {
  TempDir dir;
  const auto low = write_corpus(dir, "low.tsv", 10, 30);
  const auto high = write_corpus(dir, "high.tsv", 80, 120);
  REQUIRE(spectra_cli("analyze --input " + quoted(low) + " --format ucr-tsv --band minmax --out " + quoted(dir / "low.json")).exit_code == 0);
  REQUIRE(spectra_cli("analyze --input " + quoted(high) + " --format ucr-tsv --band minmax --out " + quoted(dir / "high.json")).exit_code == 0);

  auto r = spectra_cli("overlap --a " + quoted(dir / "low.json") + " --b " + quoted(dir / "low.json") +
                       " --plot " + quoted(dir / "self.svg") + " --out " + quoted(dir / "self.json"));
  REQUIRE(r.exit_code == 0);
  auto report = read_json(dir / "self.json");
  CHECK(report["band_iou"].get<double>() == 1.0);
  CHECK(report["histogram_overlap"].get<double>() == 1.0);
  CHECK(read_file(dir / "self.svg").rfind("<svg", 0) == 0);
  CHECK(fs::exists(dir / "self.run.json"));

  r = spectra_cli("overlap --a " + quoted(dir / "low.json") + " --b " + quoted(dir / "high.json") + " --out " +
                  quoted(dir / "cross.json"));
  REQUIRE(r.exit_code == 0);
  report = read_json(dir / "cross.json");
  CHECK(report["band_iou"].get<double>() == 0.0);
  CHECK(report["histogram_overlap"].get<double>() == 0.0);
  CHECK(report["verdict"] == "low");
}

TEST_CASE("overlap of [0,10] Hz and [5,15] Hz profiles has IoU one third") {
  TempDir dir;
  auto fixture = [&](double lo_hz, double hi_hz, const std::string& name) {
    spectra::CorpusSpectralSummary s;
    s.name = name;
    s.sample_rate = 40.0;
    s.band = {lo_hz / 40.0, hi_hz / 40.0};
    s.histogram.assign(64, 1.0 / 64);
    s.n_series = 1;
    s.source_length = 64;
    return dir.write(name + ".json", spectra::summary_to_json(s).dump());
  };
  const auto a = fixture(0, 10, "a");
  const auto b = fixture(5, 15, "b");
  REQUIRE(spectra_cli("overlap --a " + quoted(a) + " --b " + quoted(b) + " --out " + quoted(dir / "r.json")).exit_code == 0);
  CHECK(std::abs(read_json(dir / "r.json")["band_iou"].get<double>() - 1.0 / 3.0) <= 1e-12);

  // Profiles in different units cannot be compared.
  const auto corpus = write_corpus(dir, "c.tsv", 10, 20);
  REQUIRE(spectra_cli("analyze --input " + quoted(corpus) + " --format ucr-tsv --out " + quoted(dir / "n.json")).exit_code == 0);
  const auto r = spectra_cli("overlap --a " + quoted(a) + " --b " + quoted(dir / "n.json") + " --out " + quoted(dir / "m.json"));
  CHECK(r.exit_code == 2);
  CHECK_FALSE(fs::exists(dir / "m.json"));
}

TEST_CASE("eval with a band-limited encoder shows the seen/unseen gap") {
  TempDir dir;
  const auto profile = analyzed_profile(dir);
  REQUIRE(spectra_cli("generate --profile " + quoted(profile) + " --n 600 --seed 2 --out " + quoted(dir / "probe")).exit_code == 0);
  const auto band = read_json(dir / "probe" / "seen" / "manifest.json")["seen_band"];
  const auto encoder = fmt::format("bandlimited:{},{}", band["low"].get<double>(), band["high"].get<double>());
  const auto r = spectra_cli("eval --data " + quoted(dir / "probe") + " --encoder " + encoder + " --out " +
                             quoted(dir / "report.json"));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("Test MSE") != std::string::npos);
  CHECK(r.out.find(" ± ") != std::string::npos);
  const auto report = read_json(dir / "report.json");
  CHECK(report["repeats"] == 3);
  const double seen = report["variants"][0]["mse"]["mean"].get<double>();
  const double unseen = report["variants"][1]["mse"]["mean"].get<double>();
  CHECK(seen < 0.5 * unseen);
  CHECK(report["variants"][0]["runs"].size() == 3);
  CHECK(report["variants"][0]["mse"].contains("std"));
  CHECK(fs::exists(dir / "report.run.json"));
}

TEST_CASE("eval exits 4 on bridge failure and writes no report") {
  TempDir dir;
  const auto profile = analyzed_profile(dir);
  REQUIRE(spectra_cli("generate --profile " + quoted(profile) + " --n 100 --len 64 --m 2 --seed 1 --out " + quoted(dir / "probe")).exit_code == 0);
  for (const std::string mode : {"crash", "short", "wrong-version", "malformed", "id-mismatch"}) {
    const auto r = spectra_cli("eval --data " + quoted(dir / "probe") + " --encoder \"external:" +
                               std::string(FAKE_ADAPTER_PATH) + " --dim 8 --mode " + mode + "\" --out " +
                               quoted(dir / "report.json"));
    CHECK(r.exit_code == 4);
    CHECK_FALSE(fs::exists(dir / "report.json"));
  }
  const auto hang = spectra_cli("eval --data " + quoted(dir / "probe") + " --timeout-ms 200 --encoder \"external:" +
                                std::string(FAKE_ADAPTER_PATH) + " --mode hang\" --out " + quoted(dir / "report.json"));
  CHECK(hang.exit_code == 4);
  CHECK(hang.err.find("timed out") != std::string::npos);

  const auto ok = spectra_cli("eval --data " + quoted(dir / "probe") + " --repeats 1 --encoder \"external:" +
                              std::string(FAKE_ADAPTER_PATH) + " --dim 8\" --out " + quoted(dir / "report.json"));
  CHECK(ok.exit_code == 0);
  CHECK(fs::exists(dir / "report.json"));
}

TEST_CASE("eval classification on membership labels pools both variants") {
  TempDir dir;
  const auto profile = analyzed_profile(dir);
  REQUIRE(spectra_cli("generate --profile " + quoted(profile) + " --n 200 --len 128 --cls-mode membership --seed 3 --out " +
                      quoted(dir / "probe")).exit_code == 0);
  const auto r = spectra_cli("eval --data " + quoted(dir / "probe") + " --encoder spectral --task classification --repeats 2 --out " +
                             quoted(dir / "report.json"));
  REQUIRE(r.exit_code == 0);
  const auto report = read_json(dir / "report.json");
  CHECK(report["variants"].size() == 1);
  CHECK(report["variants"][0]["auc"]["mean"].get<double>() >= 0.9);
}

TEST_CASE("version and usage errors") {
  auto r = spectra_cli("--version");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("0.1.0") != std::string::npos);
  CHECK(spectra_cli("").exit_code == 2);
  CHECK(spectra_cli("transmogrify").exit_code == 2);
  CHECK(spectra_cli("eval --data x").exit_code == 2);
}
