#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "hatebench/error.hpp"
#include "hatebench/eval.hpp"
#include "hatebench/table.hpp"
#include "support.hpp"

using namespace hatebench;

namespace {

double pair_auc(const std::vector<int>& y, const std::vector<double>& s) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return wins / pairs;
}

}  // namespace

TEST_CASE("confusion counts") {
  const auto cm = eval::confusion(std::vector{1, 0}, std::vector{1, 0});
  CHECK(cm == eval::ConfusionMatrix{1, 1, 0, 0});

  const std::vector<int> y = {1, 1, 0, 0, 1, 0, 1};
  const std::vector<int> p = {1, 0, 0, 1, 1, 1, 0};
  std::vector<int> flipped(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) flipped[i] = 1 - p[i];
  const auto a = eval::confusion(y, p), b = eval::confusion(y, flipped);
  CHECK(a.tp == b.fn);
  CHECK(a.fn == b.tp);
  CHECK(a.tn == b.fp);
  CHECK(a.fp == b.tn);
  CHECK_THROWS_AS(eval::confusion(std::vector{1}, std::vector{1, 0}), DataError);
  CHECK_THROWS_AS(eval::confusion(std::vector{2}, std::vector{1}), DataError);
}

TEST_CASE("metrics of the published confusion matrix") {
  eval::ConfusionMatrix cm;
  cm.tn = 1282;
  cm.tp = 919;
  cm.fp = 233;
  cm.fn = 192;
  CHECK(cm.total() == 2626);
  const auto m = eval::metrics(cm);
  CHECK(eval::percent_1dp(m.accuracy) == 83.8);
  CHECK(eval::percent_1dp(m.precision) == 79.8);
  CHECK(eval::percent_1dp(m.recall) == 82.7);
  CHECK(eval::percent_1dp(m.f1) == 81.2);
  CHECK(std::abs(m.accuracy - 2201.0 / 2626.0) < 1e-12);
  CHECK(std::abs(m.f1 - 1838.0 / 2263.0) < 1e-12);
}

TEST_CASE("metric edge cases and identities") {
  const auto perfect = eval::metrics({5, 3, 0, 0});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  eval::ConfusionMatrix none;
  none.tn = 4;
  none.fn = 3;
  const auto z = eval::metrics(none);
  CHECK(z.precision == 0.0);
  CHECK(z.precision_undefined);
  CHECK(z.recall == 0.0);
  CHECK_FALSE(z.recall_undefined);
  CHECK(z.f1 == 0.0);
  CHECK(z.f1_undefined);

  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> d(1, 500);
  for (int i = 0; i < 200; ++i) {
    eval::ConfusionMatrix cm{d(rng), d(rng), d(rng), d(rng)};
    const auto m = eval::metrics(cm);
    const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
    const double fn = static_cast<double>(cm.fn), n = static_cast<double>(cm.total());
    CHECK(std::abs(m.f1 - 2 * m.precision * m.recall / (m.precision + m.recall)) < 1e-12);
    CHECK(std::abs(m.f1 - 2 * tp / (2 * tp + fp + fn)) < 1e-12);
    CHECK(std::abs(m.accuracy - (tp + static_cast<double>(cm.tn)) / n) < 1e-12);
  }
}

TEST_CASE("percent rounding is half-up") {
  CHECK(eval::percent_1dp(0.83816) == 83.8);
  CHECK(eval::percent_1dp(0.8125) == 81.3);
  CHECK(eval::percent_1dp(1.0) == 100.0);
}

TEST_CASE("auc") {
  CHECK(eval::auc(std::vector{1, 1, 0, 0}, std::vector{0.9, 0.8, 0.2, 0.1}) == 1.0);
  CHECK(eval::auc(std::vector{1, 1, 0, 0}, std::vector{0.1, 0.2, 0.8, 0.9}) == 0.0);
  CHECK(eval::auc(std::vector{1, 0, 1, 0}, std::vector{0.5, 0.5, 0.5, 0.5}) == 0.5);
  CHECK_THROWS(eval::auc(std::vector{1, 1}, std::vector{0.1, 0.2}));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() % 2);
      s[i] = static_cast<double>(rng() % 6);  // plenty of ties
    }
    y[0] = 1;
    y[1] = 0;
    const double a = eval::auc(y, s);
    CHECK(std::abs(a - pair_auc(y, s)) < 1e-12);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(0.5 * s[i]) - 3.0;
    CHECK(std::abs(eval::auc(y, t) - a) < 1e-12);
  }
}

TEST_CASE("report emission") {
  hbtest::TempDir dir;
  eval::ReportBundle b;
  b.run_metadata_json = R"({"command":"test"})";
  for (const char* name : {"svm", "nb", "rf", "cnn_bilstm"})
    b.methods.push_back({name, eval::metrics({10, 20, 3, 4})});
  b.confusions = {{"hs", {10, 20, 3, 4}}};
  eval::emit_report(b, dir.path().string());
  const auto csv = read_text_file(dir.file("metrics.csv"));
  CHECK(csv.rfind("method,acc,prec,rec,f1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(std::filesystem::exists(dir.file("confusion_hs.svg")));
  CHECK_FALSE(std::filesystem::exists(dir.file("curves.svg")));
  const auto json = nlohmann::json::parse(read_text_file(dir.file("report.json")));
  CHECK(json["methods"].size() == 4);
  CHECK(json["run"]["command"] == "test");

  const auto first = read_text_file(dir.file("report.json"));
  eval::emit_report(b, dir.path().string());
  CHECK(read_text_file(dir.file("report.json")) == first);

  b.curves = {{0.7, 0.6, 0.5, 0.6}, {0.5, 0.55, 0.8, 0.7}};
  eval::emit_report(b, dir.path().string());
  const auto svg = read_text_file(dir.file("curves.svg"));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);
}
