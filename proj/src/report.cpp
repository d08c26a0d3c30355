#include <fmt/core.h>

#include "spectra/probe_eval.hpp"

namespace spectra {
namespace {

nlohmann::ordered_json summary_json(const std::optional<MetricSummary>& s) {
  if (!s) return nullptr;
  return {{"mean", s->mean}, {"std", s->std}};
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json experiment_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["task"] = to_string(report.task);
  doc["encoder"] = report.encoder_id;
  doc["repeats"] = report.config.repeats;
  doc["train_config"] = report.config.train.to_json();
  doc["selection_metric"] =
      report.task == Task::regression ? "validation MSE" : "validation BCE loss";

  auto variants = nlohmann::ordered_json::array();
  for (const auto& v : report.variants) {
    nlohmann::ordered_json entry;
    entry["variant"] = v.variant;
    if (report.task == Task::regression) {
      entry["mse"] = summary_json(v.mse);
      entry["mae"] = summary_json(v.mae);
    } else {
      entry["accuracy"] = summary_json(v.accuracy);
      entry["auc"] = summary_json(v.auc);
    }
    auto runs = nlohmann::ordered_json::array();
    for (const auto& r : v.runs) {
      nlohmann::ordered_json run;
      run["task"] = to_string(r.task);
      run["variant"] = r.variant;
      if (r.task == Task::regression) {
        run["mse"] = optional_json(r.mse);
        run["mae"] = optional_json(r.mae);
      } else {
        run["accuracy"] = optional_json(r.accuracy);
        run["auc"] = optional_json(r.auc);
      }
      run["best_epoch"] = r.best_epoch;
      run["n_test"] = r.n_test;
      run["val_metric_trace"] = r.val_metric_trace;
      run["config_hash"] = r.config_hash;
      runs.push_back(std::move(run));
    }
    entry["runs"] = std::move(runs);
    variants.push_back(std::move(entry));
  }
  doc["variants"] = std::move(variants);
  doc["deltas_seen_minus_unseen"] = report.deltas;
  return doc;
}

std::string experiment_table(const ExperimentReport& report) {
  struct Row {
    const char* name;
    std::optional<MetricSummary> VariantResult::*member;
  };
  const std::vector<Row> rows =
      report.task == Task::regression
          ? std::vector<Row>{{"Test MSE", &VariantResult::mse}, {"Test MAE", &VariantResult::mae}}
          : std::vector<Row>{{"Test Accuracy", &VariantResult::accuracy},
                             {"Test AUC", &VariantResult::auc}};

  std::string out = fmt::format("task: {}   encoder: {}   repeats: {}\n", to_string(report.task),
                                report.encoder_id, report.config.repeats);
  out += fmt::format("{:<14}", "Metric");
  for (const auto& v : report.variants) {
    std::string title = v.variant;
    if (!title.empty()) title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
    out += fmt::format(" | {:<20}", title);
  }
  out += '\n';
  out += std::string(14 + 23 * report.variants.size(), '-') + '\n';
  for (const auto& row : rows) {
    out += fmt::format("{:<14}", row.name);
    for (const auto& v : report.variants) {
      const auto& s = v.*(row.member);
      out += s ? fmt::format(" | {:<20}", fmt::format("{:.4f} ± {:.4f}", s->mean, s->std))
               : fmt::format(" | {:<20}", "n/a");
    }
    out += '\n';
  }
  return out;
}

}  // namespace spectra
