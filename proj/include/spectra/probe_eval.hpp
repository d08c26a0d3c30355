#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spectra/encoder.hpp"
#include "spectra/probe_types.hpp"

namespace spectra {

/// Dense row-major matrix of embeddings, one row per sample.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Task { regression, classification };
std::string_view to_string(Task t);
Task task_from_string(std::string_view s);

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 50;
  std::size_t batch_size = 64;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

/// Per-dimension z-scoring with train statistics; constant dimensions are
/// centred only.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const FeatureMatrix& x);
  void apply(std::span<const double> in, std::span<double> out) const;
};

struct LinearHead {
  std::vector<double> weights;
  double bias = 0.0;
  bool logistic = false;
  Standardizer standardizer;

  /// Raw linear score (a logit when `logistic`).
  double score(std::span<const double> embedding) const;
  double predict(std::span<const double> embedding) const;
};

struct TrainResult {
  LinearHead head;
  int best_epoch = 0;                  // 1-based
  double best_val_metric = 0.0;
  std::vector<double> val_metric_trace;  // one entry per epoch
};

/// Mini-batch Adam on MSE (regression) or logistic BCE (classification).
/// The returned head is the epoch with the lowest validation loss.
TrainResult train_head(const FeatureMatrix& train_x, std::span<const double> train_y,
                       const FeatureMatrix& val_x, std::span<const double> val_y, Task task,
                       const TrainConfig& config);

/// Rank-statistic ROC AUC; each tied positive/negative pair counts 1/2.
double auc(std::span<const double> scores, std::span<const int> labels);

struct EvalReport {
  Task task = Task::regression;
  std::string variant;  // seen | unseen | pooled
  std::optional<double> mse, mae;
  std::optional<double> accuracy, auc;
  int best_epoch = 0;
  std::vector<double> val_metric_trace;
  std::size_t n_test = 0;
  std::string config_hash;
};

EvalReport evaluate(const LinearHead& head, const FeatureMatrix& test_x,
                    std::span<const double> test_y, Task task);

/// Embeds every sample's values, in parallel when the encoder allows it.
FeatureMatrix embed_samples(Encoder& encoder, const std::vector<ProbeSample>& samples);

std::vector<double> targets(const std::vector<ProbeSample>& samples, Task task);

struct ExperimentConfig {
  TrainConfig train;
  int repeats = 3;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct VariantResult {
  std::string variant;
  std::vector<EvalReport> runs;
  std::optional<MetricSummary> mse, mae, accuracy, auc;
};

struct ExperimentReport {
  Task task = Task::regression;
  std::string encoder_id;
  ExperimentConfig config;
  std::vector<VariantResult> variants;  // seen then unseen, or a single pooled entry
  nlohmann::ordered_json deltas;         // seen - unseen means
};

/// Independent head per variant, `repeats` times with derived seeds.
ExperimentReport run_probe_experiment(const ProbeDataset& seen, const ProbeDataset& unseen,
                                      Encoder& encoder, Task task, const ExperimentConfig& config);

/// One head on the union of both variants; used for band-membership labels,
/// where each variant alone is single-class.
ExperimentReport run_pooled_experiment(const ProbeDataset& seen, const ProbeDataset& unseen,
                                       Encoder& encoder, const ExperimentConfig& config);

nlohmann::ordered_json experiment_to_json(const ExperimentReport& report);

/// Plain-text table: metric rows, variant columns, mean ± std.
std::string experiment_table(const ExperimentReport& report);

}  // namespace spectra
