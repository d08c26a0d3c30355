#include "spectra/probe_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "spectra/dataset_io.hpp"
#include "spectra/error.hpp"
#include "spectra/parallel.hpp"
#include "spectra/rng.hpp"

namespace spectra {

std::string_view to_string(Task t) { return t == Task::regression ? "regression" : "classification"; }

Task task_from_string(std::string_view s) {
  if (s == "regression") return Task::regression;
  if (s == "classification") return Task::classification;
  throw Error(ErrorKind::config, fmt::format("unknown task '{}'", s));
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  FeatureMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("embedding {} has width {}, expected {}", r, rows[r].size(), cols));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0 && std::isfinite(learning_rate))) {
    throw Error(ErrorKind::config, "learning rate must be positive");
  }
  if (epochs < 1) throw Error(ErrorKind::config, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::config, "batch size must be >= 1");
}

nlohmann::ordered_json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"epochs", epochs}, {"batch_size", batch_size},
          {"beta1", beta1},                 {"beta2", beta2},   {"epsilon", epsilon},
          {"seed", seed}};
}

Standardizer Standardizer::fit(const FeatureMatrix& x) {
  const std::size_t d = x.cols();
  Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  if (x.rows() == 0) return s;
  const auto n = static_cast<double>(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
  }
  for (auto& m : s.mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) var[j] += (row[j] - s.mean[j]) * (row[j] - s.mean[j]);
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / n);
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

void Standardizer::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean[j]) / scale[j];
}

double LinearHead::score(std::span<const double> embedding) const {
  double z = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    z += weights[j] * (embedding[j] - standardizer.mean[j]) / standardizer.scale[j];
  }
  return z;
}

double LinearHead::predict(std::span<const double> embedding) const {
  const double z = score(embedding);
  return logistic ? 1.0 / (1.0 + std::exp(-z)) : z;
}

namespace {

// Numerically stable softplus(z) - y*z, the logistic BCE on a logit.
double bce_with_logit(double z, double y) {
  return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

FeatureMatrix standardize(const FeatureMatrix& x, const Standardizer& s) {
  FeatureMatrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) s.apply(x.row(r), out.row(r));
  return out;
}

double mean_loss(const FeatureMatrix& x, std::span<const double> y, std::span<const double> w,
                 double b, Task task) {
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * row[j];
    total += task == Task::regression ? (z - y[r]) * (z - y[r]) : bce_with_logit(z, y[r]);
  }
  return total / static_cast<double>(x.rows());
}

}  // namespace

TrainResult train_head(const FeatureMatrix& train_x, std::span<const double> train_y,
                       const FeatureMatrix& val_x, std::span<const double> val_y, Task task,
                       const TrainConfig& config) {
  config.validate();
  if (train_x.rows() == 0 || val_x.rows() == 0) {
    throw Error(ErrorKind::insufficient_data, "head training needs non-empty train and val splits");
  }
  if (train_x.rows() != train_y.size() || val_x.rows() != val_y.size()) {
    throw Error(ErrorKind::invalid_input, "feature rows and label counts differ");
  }
  if (train_x.cols() != val_x.cols()) {
    throw Error(ErrorKind::invalid_input, "train and val embeddings differ in width");
  }
  for (double y : train_y) {
    if (!std::isfinite(y)) throw Error(ErrorKind::invalid_input, "non-finite training label");
  }

  const std::size_t d = train_x.cols();
  const Standardizer standardizer = Standardizer::fit(train_x);
  const FeatureMatrix xs = standardize(train_x, standardizer);
  const FeatureMatrix vs = standardize(val_x, standardizer);

  std::vector<double> w(d, 0.0), m_w(d, 0.0), v_w(d, 0.0), grad(d);
  double b = 0.0, m_b = 0.0, v_b = 0.0;
  std::uint64_t step = 0;

  TrainResult result;
  result.head.logistic = task == Task::classification;
  result.head.standardizer = standardizer;
  result.best_val_metric = std::numeric_limits<double>::infinity();

  const std::size_t n = xs.rows();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    CounterRng rng(derive_key(config.seed, {static_cast<std::uint64_t>(epoch)}));
    const auto order = permutation(n, rng);
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const auto count = static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double grad_b = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto row = xs.row(order[k]);
        const double y = train_y[order[k]];
        double z = b;
        for (std::size_t j = 0; j < d; ++j) z += w[j] * row[j];
        double g = 0.0;
        if (task == Task::regression) {
          g = 2.0 * (z - y) / count;
          epoch_loss += (z - y) * (z - y);
        } else {
          g = (sigmoid(z) - y) / count;
          epoch_loss += bce_with_logit(z, y);
        }
        for (std::size_t j = 0; j < d; ++j) grad[j] += g * row[j];
        grad_b += g;
      }

      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t j = 0; j < d; ++j) {
        m_w[j] = config.beta1 * m_w[j] + (1.0 - config.beta1) * grad[j];
        v_w[j] = config.beta2 * v_w[j] + (1.0 - config.beta2) * grad[j] * grad[j];
        w[j] -= config.learning_rate * (m_w[j] / c1) / (std::sqrt(v_w[j] / c2) + config.epsilon);
      }
      m_b = config.beta1 * m_b + (1.0 - config.beta1) * grad_b;
      v_b = config.beta2 * v_b + (1.0 - config.beta2) * grad_b * grad_b;
      b -= config.learning_rate * (m_b / c1) / (std::sqrt(v_b / c2) + config.epsilon);
    }

    const double val_metric = mean_loss(vs, val_y, w, b, task);
    if (!std::isfinite(epoch_loss) || !std::isfinite(val_metric)) {
      throw Error(ErrorKind::divergence,
                  fmt::format("training diverged at epoch {} (non-finite loss)", epoch));
    }
    result.val_metric_trace.push_back(val_metric);
    if (val_metric < result.best_val_metric) {
      result.best_val_metric = val_metric;
      result.best_epoch = epoch;
      result.head.weights = w;
      result.head.bias = b;
    }
  }
  return result;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (int l : labels) positives += l == 1 ? 1 : 0;
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorKind::undefined_auc, "AUC is undefined when the split holds a single class");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks (1-based) over tie groups; all values are multiples of 1/2.
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) positive_rank_sum += midrank;
    }
    i = j;
  }
  const auto p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

EvalReport evaluate(const LinearHead& head, const FeatureMatrix& test_x,
                    std::span<const double> test_y, Task task) {
  if (test_x.rows() == 0) throw Error(ErrorKind::insufficient_data, "empty test split");
  EvalReport r;
  r.task = task;
  r.n_test = test_x.rows();
  const auto n = static_cast<double>(test_x.rows());
  if (task == Task::regression) {
    double se = 0.0, ae = 0.0;
    for (std::size_t i = 0; i < test_x.rows(); ++i) {
      const double e = head.predict(test_x.row(i)) - test_y[i];
      se += e * e;
      ae += std::abs(e);
    }
    r.mse = se / n;
    r.mae = ae / n;
  } else {
    std::vector<double> scores(test_x.rows());
    std::vector<int> labels(test_x.rows());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_x.rows(); ++i) {
      scores[i] = head.score(test_x.row(i));
      labels[i] = test_y[i] > 0.5 ? 1 : 0;
      const int predicted = sigmoid(scores[i]) >= 0.5 ? 1 : 0;
      correct += predicted == labels[i] ? 1 : 0;
    }
    r.accuracy = static_cast<double>(correct) / n;
    r.auc = auc(scores, labels);
  }
  return r;
}

FeatureMatrix embed_samples(Encoder& encoder, const std::vector<ProbeSample>& samples) {
  std::vector<TimeSeries> series;
  series.reserve(samples.size());
  for (const auto& s : samples) series.push_back(s.values);

  std::vector<std::vector<double>> rows;
  if (encoder.thread_safe()) {
    rows.resize(series.size());
    constexpr std::size_t kChunk = 32;
    const std::size_t chunks = (series.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t c) {
      const std::size_t begin = c * kChunk;
      const std::size_t count = std::min(kChunk, series.size() - begin);
      auto part = encoder.embed_batch(std::span<const TimeSeries>(series).subspan(begin, count));
      for (std::size_t i = 0; i < count; ++i) rows[begin + i] = std::move(part[i]);
    });
  } else {
    rows = encoder.embed_batch(series);
  }
  for (const auto& row : rows) {
    for (double v : row) {
      if (!std::isfinite(v)) throw Error(ErrorKind::invalid_input, "encoder produced a non-finite value");
    }
  }
  return FeatureMatrix::from_rows(rows);
}

std::vector<double> targets(const std::vector<ProbeSample>& samples, Task task) {
  std::vector<double> y;
  y.reserve(samples.size());
  for (const auto& s : samples) {
    y.push_back(task == Task::regression ? s.y_norm : static_cast<double>(s.class_label));
  }
  return y;
}

namespace {

struct EmbeddedSplits {
  FeatureMatrix train, val, test;
  std::vector<double> train_y, val_y, test_y;
};

EmbeddedSplits embed_dataset(Encoder& encoder, const std::vector<ProbeSample>& train,
                             const std::vector<ProbeSample>& val,
                             const std::vector<ProbeSample>& test, Task task) {
  return {embed_samples(encoder, train), embed_samples(encoder, val), embed_samples(encoder, test),
          targets(train, task),          targets(val, task),          targets(test, task)};
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

VariantResult run_variant(const EmbeddedSplits& data, std::string variant, Task task,
                          const ExperimentConfig& config, const std::string& config_hash) {
  if (config.repeats < 1) throw Error(ErrorKind::config, "repeats must be >= 1");
  VariantResult out;
  out.variant = std::move(variant);
  for (int rep = 0; rep < config.repeats; ++rep) {
    TrainConfig train = config.train;
    train.seed = derive_key(config.train.seed, {static_cast<std::uint64_t>(rep)});
    const auto fit = train_head(data.train, data.train_y, data.val, data.val_y, task, train);
    auto report = evaluate(fit.head, data.test, data.test_y, task);
    report.variant = out.variant;
    report.best_epoch = fit.best_epoch;
    report.val_metric_trace = fit.val_metric_trace;
    report.config_hash = config_hash;
    out.runs.push_back(std::move(report));
  }
  auto collect = [&](auto member) {
    std::vector<double> values;
    for (const auto& r : out.runs) {
      if (!(r.*member)) return std::optional<MetricSummary>{};
      values.push_back(*(r.*member));
    }
    return std::optional<MetricSummary>{summarize(values)};
  };
  out.mse = collect(&EvalReport::mse);
  out.mae = collect(&EvalReport::mae);
  out.accuracy = collect(&EvalReport::accuracy);
  out.auc = collect(&EvalReport::auc);
  return out;
}

std::string experiment_hash(const ProbeDataset& seen, const ProbeDataset& unseen,
                            const std::string& encoder_id, Task task,
                            const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["seen"] = seen.meta.config_hash;
  j["unseen"] = unseen.meta.config_hash;
  j["encoder"] = encoder_id;
  j["task"] = to_string(task);
  j["train"] = config.train.to_json();
  j["repeats"] = config.repeats;
  return fnv1a_hex(j.dump());
}

void check_compatible(const ProbeDataset& seen, const ProbeDataset& unseen) {
  if (seen.meta.length != unseen.meta.length) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("seen and unseen datasets differ in length ({} vs {})",
                            seen.meta.length, unseen.meta.length));
  }
}

}  // namespace

ExperimentReport run_probe_experiment(const ProbeDataset& seen, const ProbeDataset& unseen,
                                      Encoder& encoder, Task task, const ExperimentConfig& config) {
  check_compatible(seen, unseen);
  ExperimentReport report;
  report.task = task;
  report.encoder_id = encoder.id();
  report.config = config;
  const auto hash = experiment_hash(seen, unseen, report.encoder_id, task, config);

  const auto seen_data = embed_dataset(encoder, seen.train, seen.val, seen.test, task);
  const auto unseen_data = embed_dataset(encoder, unseen.train, unseen.val, unseen.test, task);
  report.variants.push_back(run_variant(seen_data, "seen", task, config, hash));
  report.variants.push_back(run_variant(unseen_data, "unseen", task, config, hash));

  const auto& s = report.variants[0];
  const auto& u = report.variants[1];
  report.deltas = nlohmann::ordered_json::object();
  if (s.mse) report.deltas["mse"] = s.mse->mean - u.mse->mean;
  if (s.mae) report.deltas["mae"] = s.mae->mean - u.mae->mean;
  if (s.accuracy) report.deltas["accuracy"] = s.accuracy->mean - u.accuracy->mean;
  if (s.auc) report.deltas["auc"] = s.auc->mean - u.auc->mean;
  return report;
}

ExperimentReport run_pooled_experiment(const ProbeDataset& seen, const ProbeDataset& unseen,
                                       Encoder& encoder, const ExperimentConfig& config) {
  check_compatible(seen, unseen);
  auto join = [](const std::vector<ProbeSample>& a, const std::vector<ProbeSample>& b) {
    std::vector<ProbeSample> out(a);
    out.insert(out.end(), b.begin(), b.end());
    return out;
  };
  ExperimentReport report;
  report.task = Task::classification;
  report.encoder_id = encoder.id();
  report.config = config;
  const auto hash = experiment_hash(seen, unseen, report.encoder_id, report.task, config);
  const auto data = embed_dataset(encoder, join(seen.train, unseen.train), join(seen.val, unseen.val),
                                  join(seen.test, unseen.test), Task::classification);
  report.variants.push_back(run_variant(data, "pooled", Task::classification, config, hash));
  report.deltas = nlohmann::ordered_json::object();
  return report;
}

}  // namespace spectra
