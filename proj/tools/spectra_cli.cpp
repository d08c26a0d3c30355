#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "run_manifest.hpp"
#include "spectra/dataset_io.hpp"
#include "spectra/encoder.hpp"
#include "spectra/error.hpp"
#include "spectra/overlap.hpp"
#include "spectra/probe_eval.hpp"
#include "spectra/probe_gen.hpp"

namespace fs = std::filesystem;
using namespace spectra;
using spectra::cli::RunManifest;

namespace {

enum Exit { kOk = 0, kOther = 1, kInput = 2, kInfeasible = 3, kBridge = 4 };

int exit_code(const Error& e) {
  if (e.is_bridge()) return kBridge;
  switch (e.kind()) {
    case ErrorKind::infeasible_shift:
      return kInfeasible;
    case ErrorKind::divergence:
    case ErrorKind::undefined_auc:
      return kOther;
    default:
      return kInput;
  }
}

std::string one_line(std::string msg) {
  for (auto& c : msg) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return msg;
}

CorpusSpectralSummary load_summary(const fs::path& path) {
  const auto text = cli::read_text(path);
  try {
    return summary_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, fmt::format("{}: not a spectral profile: {}", path.string(), e.what()));
  }
}

struct AnalyzeArgs {
  std::string input, format = "csv-rows", band = "quantile", out, name;
  int top_k = kDefaultTopK;
  std::optional<double> sample_rate;
  std::size_t bins = kDefaultHistogramBins;
};

int cmd_analyze(const AnalyzeArgs& a) {
  RunManifest manifest("analyze");
  if (a.band != "minmax" && a.band != "quantile") {
    throw Error(ErrorKind::config, fmt::format("--band must be minmax or quantile, got '{}'", a.band));
  }
  const auto format = corpus_format_from_string(a.format);
  auto corpus = load_corpus(a.input, format, a.sample_rate);
  if (!a.name.empty()) corpus.name = a.name;
  const BandMode mode = a.band == "minmax" ? BandMode::minmax() : BandMode{};
  const auto summary = summarize_corpus(corpus, a.top_k, a.bins, mode);

  manifest.config() = {{"input", a.input}, {"format", a.format}, {"top_k", a.top_k}, {"band", a.band},
                       {"bins", a.bins}, {"name", corpus.name}};
  if (a.sample_rate) manifest.config()["sample_rate"] = *a.sample_rate;
  manifest.add_input(a.input);
  manifest.add_output(a.out);

  cli::write_text_atomic(a.out, summary_to_json(summary).dump(2) + "\n");
  manifest.write(cli::manifest_path_for(a.out));

  const double scale = summary.sample_rate.value_or(1.0);
  fmt::print("{}: {} series ({} degenerate), band [{:.6g}, {:.6g}] {}\n", summary.name, summary.n_series,
             summary.n_degenerate, summary.band.low * scale, summary.band.high * scale,
             summary.sample_rate ? "Hz" : "cycles/sample");
  return kOk;
}

struct GenerateArgs {
  std::string profile, out, cls_mode = "median-bin";
  std::size_t n = 1000, len = 512;
  int m = 5;
  double noise = 0.05, f_max = 0.5;
  std::optional<double> delta;
  std::uint64_t seed = 0;
  bool snap = false;
};

int cmd_generate(const GenerateArgs& a) {
  RunManifest manifest("generate");
  const auto summary = load_summary(a.profile);

  ProbeConfig config;
  config.band = summary.band;
  config.n_samples = a.n;
  config.length = a.len;
  config.sinusoids = a.m;
  config.noise_sigma = a.noise;
  config.delta = a.delta;
  config.f_max = a.f_max;
  config.seed = a.seed;
  config.classification_mode = classification_mode_from_string(a.cls_mode);
  config.snap_to_bins = a.snap;
  config.validate();

  const auto pair = generate_probe_pair(config);
  const fs::path dir = a.out;
  save_probe_dataset(pair.seen, dir / "seen");
  save_probe_dataset(pair.unseen, dir / "unseen");

  // Paths are relative to the output directory so that reruns into a
  // different directory produce identical manifests.
  manifest.config() = {{"profile", a.profile}, {"probe", config.to_json()}};
  manifest.add_input(a.profile);
  for (const char* variant : {"seen", "unseen"}) {
    for (const char* file : {"train.ndjson", "val.ndjson", "test.ndjson", "manifest.json"}) {
      manifest.add_output(fmt::format("{}/{}", variant, file));
    }
  }
  manifest.write(dir / "run_manifest.json");

  const auto& m = pair.seen.meta;
  fmt::print("seen [{:.6g}, {:.6g}], unseen [{:.6g}, {:.6g}], delta {:.6g}, {} samples per variant\n",
             m.seen_band.low, m.seen_band.high, m.unseen_band.low, m.unseen_band.high, m.delta, a.n);
  return kOk;
}

struct OverlapArgs {
  std::string a, b, out;
  std::optional<std::string> plot;
};

int cmd_overlap(const OverlapArgs& args) {
  RunManifest manifest("overlap");
  const auto a = load_summary(args.a);
  const auto b = load_summary(args.b);
  const auto report = spectral_overlap(a, b);

  manifest.config() = {{"a", args.a}, {"b", args.b}};
  manifest.add_input(args.a);
  manifest.add_input(args.b);
  manifest.add_output(args.out);
  if (args.plot) {
    manifest.config()["plot"] = *args.plot;
    manifest.add_output(*args.plot);
  }

  cli::write_text_atomic(args.out, overlap_to_json(report).dump(2) + "\n");
  if (args.plot) cli::write_text_atomic(*args.plot, overlap_svg(a, b, report));
  manifest.write(cli::manifest_path_for(args.out));

  fmt::print("band_iou {:.4f}, histogram_overlap {:.4f}, verdict {}\n", report.band_iou,
             report.histogram_overlap, to_string(report.verdict));
  return kOk;
}

struct EvalArgs {
  std::string data, encoder, task = "regression", out;
  int repeats = 3;
  std::uint64_t seed = 0;
  int timeout_ms = 30000;
};

int cmd_eval(const EvalArgs& a) {
  RunManifest manifest("eval");
  const Task task = task_from_string(a.task);
  const fs::path dir = a.data;
  const auto seen = load_probe_dataset(dir / "seen");
  const auto unseen = load_probe_dataset(dir / "unseen");

  ExperimentConfig config;
  config.repeats = a.repeats;
  config.train.seed = a.seed;
  if (config.repeats < 1) throw Error(ErrorKind::config, "--repeats must be >= 1");

  const auto encoder = make_encoder(a.encoder, a.timeout_ms);
  const bool pooled = task == Task::classification &&
                      seen.meta.classification_mode == ClassificationMode::band_membership;
  const auto report = pooled ? run_pooled_experiment(seen, unseen, *encoder, config)
                             : run_probe_experiment(seen, unseen, *encoder, task, config);

  manifest.config() = {{"data", a.data},       {"encoder", a.encoder}, {"task", a.task},
                       {"repeats", a.repeats}, {"seed", a.seed},       {"timeout_ms", a.timeout_ms}};
  for (const char* variant : {"seen", "unseen"}) manifest.add_input(dir / variant / "manifest.json");
  manifest.add_output(a.out);

  cli::write_text_atomic(a.out, experiment_to_json(report).dump(2) + "\n");
  manifest.write(cli::manifest_path_for(a.out));
  std::cout << experiment_table(report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-shift probing toolkit"};
  app.set_version_flag("--version", cli::kToolVersion);
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Summarize the dominant frequencies of a corpus");
  an->add_option("--input", analyze.input, "Corpus file")->required();
  an->add_option("--format", analyze.format, "csv-rows | ucr-tsv | ndjson")->capture_default_str();
  an->add_option("--top-k", analyze.top_k, "Dominant peaks per series")->capture_default_str();
  an->add_option("--band", analyze.band, "minmax | quantile")->capture_default_str();
  an->add_option("--sample-rate", analyze.sample_rate, "Sampling rate in Hz");
  an->add_option("--bins", analyze.bins, "Histogram bins over (0, Nyquist]")->capture_default_str();
  an->add_option("--name", analyze.name, "Corpus name recorded in the profile");
  an->add_option("--out", analyze.out, "Profile JSON to write")->required();

  GenerateArgs generate;
  auto* ge = app.add_subcommand("generate", "Synthesize seen/unseen probe datasets from a profile");
  ge->add_option("--profile", generate.profile, "Profile JSON from analyze")->required();
  ge->add_option("--n", generate.n, "Samples per variant")->capture_default_str();
  ge->add_option("--len", generate.len, "Series length")->capture_default_str();
  ge->add_option("--m", generate.m, "Sinusoids per sample")->capture_default_str();
  ge->add_option("--noise", generate.noise, "Gaussian noise sigma")->capture_default_str();
  ge->add_option("--delta", generate.delta, "Band shift; drawn when omitted");
  ge->add_option("--seed", generate.seed, "Generation seed")->capture_default_str();
  ge->add_option("--cls-mode", generate.cls_mode, "membership | median-bin")->capture_default_str();
  ge->add_option("--f-max", generate.f_max, "Upper frequency limit")->capture_default_str();
  ge->add_flag("--snap-to-bins", generate.snap, "Place tones on DFT bins");
  ge->add_option("--out", generate.out, "Output directory")->required();

  OverlapArgs overlap;
  auto* ov = app.add_subcommand("overlap", "Compare two spectral profiles");
  ov->add_option("--a", overlap.a, "First profile")->required();
  ov->add_option("--b", overlap.b, "Second profile")->required();
  ov->add_option("--plot", overlap.plot, "SVG figure to write");
  ov->add_option("--out", overlap.out, "Report JSON to write")->required();

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Linear-probe an encoder on a generated dataset pair");
  ev->add_option("--data", eval.data, "Directory written by generate")->required();
  ev->add_option("--encoder", eval.encoder,
                 "spectral | bandlimited:LOW,HIGH[,hann|rect] | randproj[:SEED] | external:CMD | tcp:HOST:PORT")
      ->required();
  ev->add_option("--task", eval.task, "regression | classification")->capture_default_str();
  ev->add_option("--repeats", eval.repeats, "Independent head trainings")->capture_default_str();
  ev->add_option("--seed", eval.seed, "Training seed")->capture_default_str();
  ev->add_option("--timeout-ms", eval.timeout_ms, "Bridge reply timeout")->capture_default_str();
  ev->add_option("--out", eval.out, "Report JSON to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "spectra: error: " << one_line(e.what()) << '\n';
    return kInput;
  }

  try {
    if (*an) return cmd_analyze(analyze);
    if (*ge) return cmd_generate(generate);
    if (*ov) return cmd_overlap(overlap);
    if (*ev) return cmd_eval(eval);
  } catch (const Error& e) {
    std::cerr << "spectra: error: " << one_line(e.what()) << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "spectra: error: " << one_line(e.what()) << '\n';
    return kOther;
  }
  return kOther;
}
