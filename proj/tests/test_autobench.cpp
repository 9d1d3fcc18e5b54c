#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "hatebench/autobench.hpp"
#include "hatebench/error.hpp"

using namespace hatebench;
using autobench::FoldAssignment;

namespace {

std::vector<int> fold_labels(const FoldAssignment& f, std::span<const int> y, std::size_t k) {
  std::vector<int> out;
  for (auto r : f.rows_in(k)) out.push_back(y[r]);
  return out;
}

autobench::LeaderboardEntry stub_entry(double f1, double acc, classic::Family family) {
  eval::MetricsReport m;
  m.f1 = f1;
  m.accuracy = acc;
  return autobench::make_entry(classic::EstimatorSpec::make(family), {m, m});
}

}  // namespace

TEST_CASE("stratified folds") {
  const std::vector<int> y = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  const auto f = autobench::kfold_stratified(y, 5, 3);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto labels = fold_labels(f, y, k);
    CHECK(labels.size() == 2);
    CHECK(std::count(labels.begin(), labels.end(), 1) == 1);
  }
  const std::vector<int> four = {1, 0, 1, 0};
  const auto g = autobench::kfold_stratified(four, 2, 3);
  for (std::size_t k = 0; k < 2; ++k) CHECK(fold_labels(g, four, k) .size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto l = fold_labels(g, four, k);
    CHECK(std::count(l.begin(), l.end(), 1) == 1);
  }
}

TEST_CASE("folds partition the rows and balance each class within one") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + rng() % 200;
    const std::size_t k = 2 + rng() % 9;
    std::vector<int> y(n);
    for (auto& v : y) v = rng() % 3 == 0 ? 1 : 0;
    const auto f = autobench::kfold_stratified(y, k, rng());
    std::set<std::size_t> seen;
    for (std::size_t fold = 0; fold < k; ++fold) {
      const auto in = f.rows_in(fold);
      const auto out = f.rows_outside(fold);
      CHECK(in.size() + out.size() == n);
      for (auto r : in) CHECK(seen.insert(r).second);
    }
    CHECK(seen.size() == n);
    for (int cls = 0; cls < 2; ++cls) {
      std::size_t lo = n, hi = 0;
      for (std::size_t fold = 0; fold < k; ++fold) {
        const auto l = fold_labels(f, y, fold);
        const auto c = static_cast<std::size_t>(std::count(l.begin(), l.end(), cls));
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      CHECK(hi - lo <= 1);
    }
  }
}

TEST_CASE("cross_validate with stub models") {
  const std::vector<int> y = {1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0};
  const auto f = autobench::kfold_stratified(y, 3, 5);

  autobench::FitPredict constant = [](auto, auto eval_rows) { return std::vector<int>(eval_rows.size(), 0); };
  const auto reports = autobench::cross_validate(constant, y, f);
  REQUIRE(reports.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto l = fold_labels(f, y, k);
    const double majority = static_cast<double>(std::count(l.begin(), l.end(), 0)) / static_cast<double>(l.size());
    CHECK(reports[k].accuracy == doctest::Approx(majority).epsilon(1e-15));
  }

  autobench::FitPredict oracle = [&](auto, auto eval_rows) {
    std::vector<int> out;
    for (auto r : eval_rows) out.push_back(y[r]);
    return out;
  };
  for (const auto& r : autobench::cross_validate(oracle, y, f)) CHECK(r.f1 == 1.0);

  autobench::FitPredict failing = [](auto, auto) -> std::vector<int> { throw TrainingError("boom"); };
  try {
    autobench::cross_validate(failing, y, f);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("fold 0") != std::string::npos);
  }
}

TEST_CASE("ranking") {
  auto board = autobench::rank({stub_entry(0.5, 0.9, classic::Family::NaiveBayes),
                                stub_entry(0.9, 0.5, classic::Family::LinearSvm)});
  CHECK(board.best().spec.family == classic::Family::LinearSvm);
  CHECK(board.best().mean_f1 == 0.9);
  auto single = autobench::rank({stub_entry(0.1, 0.1, classic::Family::RandomForest)});
  CHECK(single.best().spec.family == classic::Family::RandomForest);
  auto tied = autobench::rank({stub_entry(0.7, 0.8, classic::Family::RandomForest),
                               stub_entry(0.7, 0.8, classic::Family::LinearSvm)});
  CHECK(tied.entries[0].spec.family == classic::Family::LinearSvm);
}

TEST_CASE("compare, refit and leaderboard output") {
  std::mt19937_64 rng(21);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    const int label = i % 3 == 0 ? 1 : 0;
    std::vector<double> r(5, 0.0);
    r[label ? 0 : 1] = 1.0 + static_cast<double>(rng() % 3);
    r[2 + rng() % 3] = 1.0;
    rows.push_back(r);
    y.push_back(label);
  }
  const auto X = features::SparseMatrix::from_dense(rows);
  const auto folds = autobench::kfold_stratified(y, 5, 2);
  const std::vector specs = {classic::EstimatorSpec::make(classic::Family::NaiveBayes),
                             classic::EstimatorSpec::make(classic::Family::RandomForest, {{"n_trees", 10}}, 4)};
  const auto board = autobench::compare_models(specs, X, y, folds, 1);
  CHECK(board.entries.size() == 2);
  for (const auto& e : board.entries) CHECK(e.per_fold.size() == 5);

  const auto one = autobench::compare_models(std::span(specs.data(), 1), X, y, folds, 1);
  const auto champion = autobench::refit_champion(one, X, y, 1);
  CHECK(champion.family == classic::Family::NaiveBayes);
  CHECK(champion.n_features == X.n_cols);
  const auto direct = classic::train(specs[0], X, y, 1);
  CHECK(classic::model_to_json(champion) == classic::model_to_json(direct));
  CHECK(classic::model_to_json(autobench::refit_champion(board, X, y, 1)) ==
        classic::model_to_json(autobench::refit_champion(board, X, y, 2)));

  const auto csv = autobench::leaderboard_csv(board);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.rfind("family,f1_fold0,f1_fold1,f1_fold2,f1_fold3,f1_fold4,mean_f1,mean_accuracy,rank", 0) == 0);
}
