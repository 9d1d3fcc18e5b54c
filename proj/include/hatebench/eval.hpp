#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hatebench::eval {

struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Scores against the positive class (label 1). Ratios with a zero
/// denominator are reported as 0 and flagged instead of throwing.
struct MetricsReport {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  bool precision_undefined = false, recall_undefined = false, f1_undefined = false;
  std::optional<double> auc;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

MetricsReport metrics(const ConfusionMatrix& cm);

/// Mann-Whitney rank statistic; tied scores share their average rank.
double auc(std::span<const int> y_true, std::span<const double> scores);

/// Percent rounded half-up to one decimal, e.g. 0.83816 -> 83.8.
double percent_1dp(double fraction);

struct MethodResult {
  std::string method;
  MetricsReport metrics;
};

struct TaskConfusion {
  std::string task;
  ConfusionMatrix cm;
};

struct EpochCurve {
  double train_loss, val_loss, train_auc, val_auc;
};

/// Everything one command reports. `extra` carries command-specific JSON
/// (leaderboard, run metadata) serialized verbatim into report.json.
struct ReportBundle {
  std::string run_metadata_json = "{}";
  std::string leaderboard_json;  // empty when absent
  std::vector<MethodResult> methods;
  std::vector<TaskConfusion> confusions;
  std::vector<EpochCurve> curves;  // empty when absent
};

/// Writes report.json, metrics.csv, confusion_<task>.svg and, when curves
/// are present, curves.svg. Output is a pure function of the bundle.
void emit_report(const ReportBundle& bundle, const std::string& out_dir);

std::string report_json(const ReportBundle& bundle);
std::string metrics_csv(std::span<const MethodResult> methods);
std::string confusion_svg(const TaskConfusion& tc);
std::string curves_svg(std::span<const EpochCurve> curves);

}  // namespace hatebench::eval
