#include "hatebench/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hatebench/error.hpp"
#include "hatebench/svg.hpp"
#include "hatebench/table.hpp"

namespace hatebench::eval {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw DataError("confusion: length mismatch (" + std::to_string(y_true.size()) + " vs " +
                    std::to_string(y_pred.size()) + ")");
  if (y_true.empty()) throw DataError("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1))
      throw DataError("confusion: non-binary entry at index " + std::to_string(i));
    if (t == 1 && p == 1) ++cm.tp;
    else if (t == 0 && p == 0) ++cm.tn;
    else if (t == 0) ++cm.fp;
    else ++cm.fn;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("metrics: empty confusion matrix");
  MetricsReport r;
  const auto d = [](std::size_t v) { return static_cast<double>(v); };
  r.accuracy = d(cm.tp + cm.tn) / d(cm.total());
  if (cm.tp + cm.fp == 0) r.precision_undefined = true;
  else r.precision = d(cm.tp) / d(cm.tp + cm.fp);
  if (cm.tp + cm.fn == 0) r.recall_undefined = true;
  else r.recall = d(cm.tp) / d(cm.tp + cm.fn);
  if (r.precision + r.recall > 0) r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  else r.f1_undefined = true;
  return r;
}

double auc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) throw DataError("auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (y_true[order[k]] == 1) rank_sum += avg_rank;
    i = j;
  }
  for (int y : y_true) n_pos += y == 1;
  const std::size_t n_neg = y_true.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("auc: both classes must be present");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1) / 2) / (np * nn);
}

double percent_1dp(double fraction) { return std::floor(fraction * 1000.0 + 0.5) / 10.0; }

namespace {

nlohmann::ordered_json metrics_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["auc"] = m.auc ? nlohmann::ordered_json(*m.auc) : nlohmann::ordered_json(nullptr);
  j["precision_undefined"] = m.precision_undefined;
  j["recall_undefined"] = m.recall_undefined;
  j["f1_undefined"] = m.f1_undefined;
  return j;
}

}  // namespace

std::string report_json(const ReportBundle& b) {
  nlohmann::ordered_json j;
  j["run"] = nlohmann::ordered_json::parse(b.run_metadata_json);
  if (!b.leaderboard_json.empty())
    j["leaderboard"] = nlohmann::ordered_json::parse(b.leaderboard_json);
  auto methods = nlohmann::ordered_json::array();
  for (const auto& m : b.methods) {
    auto entry = metrics_json(m.metrics);
    entry = nlohmann::ordered_json{{"method", m.method}, {"metrics", entry}};
    methods.push_back(entry);
  }
  j["methods"] = methods;
  auto conf = nlohmann::ordered_json::array();
  for (const auto& c : b.confusions)
    conf.push_back({{"task", c.task}, {"tn", c.cm.tn}, {"fp", c.cm.fp}, {"fn", c.cm.fn},
                    {"tp", c.cm.tp}});
  j["confusion"] = conf;
  if (!b.curves.empty()) {
    auto curves = nlohmann::ordered_json::array();
    for (std::size_t e = 0; e < b.curves.size(); ++e) {
      const auto& c = b.curves[e];
      curves.push_back({{"epoch", e + 1}, {"train_loss", c.train_loss}, {"val_loss", c.val_loss},
                        {"train_auc", c.train_auc}, {"val_auc", c.val_auc}});
    }
    j["curves"] = curves;
  }
  return j.dump(2) + "\n";
}

std::string metrics_csv(std::span<const MethodResult> methods) {
  std::ostringstream out;
  out << "method,acc,prec,rec,f1\n";
  for (const auto& m : methods) {
    out << csv_field(m.method) << ',' << svg::num(percent_1dp(m.metrics.accuracy), 1) << ','
        << svg::num(percent_1dp(m.metrics.precision), 1) << ','
        << svg::num(percent_1dp(m.metrics.recall), 1) << ','
        << svg::num(percent_1dp(m.metrics.f1), 1) << '\n';
  }
  return out.str();
}

std::string confusion_svg(const TaskConfusion& tc) {
  svg::Document doc(360, 340);
  doc.text(180, 22, "Confusion matrix (" + tc.task + ")", 14, "middle");
  const double cells[2][2] = {{static_cast<double>(tc.cm.tn), static_cast<double>(tc.cm.fp)},
                              {static_cast<double>(tc.cm.fn), static_cast<double>(tc.cm.tp)}};
  const double vmax = std::max({cells[0][0], cells[0][1], cells[1][0], cells[1][1], 1.0});
  const double x0 = 100, y0 = 60, size = 110;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double t = cells[r][c] / vmax;
      // White to dark blue ramp.
      const int red = static_cast<int>(std::lround(255 - t * (255 - 8)));
      const int green = static_cast<int>(std::lround(255 - t * (255 - 48)));
      const int blue = static_cast<int>(std::lround(255 - t * (255 - 107)));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02x%02x", red, green, blue);
      doc.rect(x0 + c * size, y0 + r * size, size, size, fill, "#555");
      doc.text(x0 + c * size + size / 2, y0 + r * size + size / 2 + 6,
               svg::num(cells[r][c], 0), 16, "middle", t > 0.5 ? "white" : "#222");
    }
  }
  doc.text(x0 + size / 2, y0 + 2 * size + 20, "0", 12, "middle");
  doc.text(x0 + 1.5 * size, y0 + 2 * size + 20, "1", 12, "middle");
  doc.text(x0 + size, y0 + 2 * size + 40, "Predicted label", 12, "middle");
  doc.text(x0 - 12, y0 + size / 2 + 4, "0", 12, "end");
  doc.text(x0 - 12, y0 + 1.5 * size + 4, "1", 12, "end");
  doc.text(30, y0 + size + 4, "True", 12, "middle");
  return doc.str();
}

std::string curves_svg(std::span<const EpochCurve> curves) {
  std::vector<double> tl, vl, ta, va;
  for (const auto& c : curves) {
    tl.push_back(c.train_loss);
    vl.push_back(c.val_loss);
    ta.push_back(c.train_auc);
    va.push_back(c.val_auc);
  }
  svg::Document doc(900, 320);
  svg::line_panel(doc, 0, 0, 450, 320, "Loss", "epoch",
                  {{"train", tl, "#4c72b0", ""}, {"validation", vl, "#c44e52", "5,3"}});
  svg::line_panel(doc, 450, 0, 450, 320, "AUC", "epoch",
                  {{"train", ta, "#4c72b0", ""}, {"validation", va, "#c44e52", "5,3"}});
  return doc.str();
}

void emit_report(const ReportBundle& b, const std::string& out_dir) {
  if (b.methods.empty()) throw DataError("emit_report: no metrics to report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
  const std::filesystem::path dir(out_dir);
  write_text_file((dir / "report.json").string(), report_json(b));
  write_text_file((dir / "metrics.csv").string(), metrics_csv(b.methods));
  for (const auto& c : b.confusions)
    write_text_file((dir / ("confusion_" + c.task + ".svg")).string(), confusion_svg(c));
  if (!b.curves.empty()) write_text_file((dir / "curves.svg").string(), curves_svg(b.curves));
}

}  // namespace hatebench::eval
