#include "hatebench/autobench.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hatebench/error.hpp"
#include "hatebench/rng.hpp"
#include "hatebench/table.hpp"

namespace hatebench::autobench {

std::vector<std::size_t> FoldAssignment::rows_in(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldAssignment::rows_outside(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) rows.push_back(i);
  return rows;
}

FoldAssignment kfold_stratified(std::span<const int> y, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("kfold_stratified: K must be at least 2");
  FoldAssignment folds;
  folds.k = k;
  folds.seed = seed;
  folds.fold_of.assign(y.size(), 0);
  Rng rng(seed);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) members.push_back(i);
    if (members.size() < k)
      throw DataError("kfold_stratified: class " + std::to_string(cls) + " has " +
                      std::to_string(members.size()) + " rows, fewer than K=" + std::to_string(k));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j) folds.fold_of[members[j]] = j % k;
  }
  return folds;
}

std::vector<eval::MetricsReport> cross_validate(const FitPredict& model, std::span<const int> y,
                                                const FoldAssignment& folds) {
  if (folds.fold_of.size() != y.size())
    throw DataError("cross_validate: fold assignment does not match the label count");
  std::vector<eval::MetricsReport> reports;
  for (std::size_t k = 0; k < folds.k; ++k) {
    const auto train_rows = folds.rows_outside(k);
    const auto eval_rows = folds.rows_in(k);
    std::vector<int> predicted;
    try {
      predicted = model(train_rows, eval_rows);
    } catch (const std::exception& e) {
      throw TrainingError("fold " + std::to_string(k) + ": " + e.what());
    }
    std::vector<int> truth;
    truth.reserve(eval_rows.size());
    for (auto r : eval_rows) truth.push_back(y[r]);
    reports.push_back(eval::metrics(eval::confusion(truth, predicted)));
  }
  return reports;
}

namespace {

std::vector<int> gather_labels(std::span<const int> y, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(y[r]);
  return out;
}

std::vector<textprep::CleanDoc> gather_docs(std::span<const textprep::CleanDoc> docs,
                                            std::span<const std::size_t> rows) {
  std::vector<textprep::CleanDoc> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(docs[r]);
  return out;
}

}  // namespace

std::vector<eval::MetricsReport> cross_validate(const classic::EstimatorSpec& spec,
                                                const features::SparseMatrix& X,
                                                std::span<const int> y,
                                                const FoldAssignment& folds, unsigned threads) {
  FitPredict fp = [&](std::span<const std::size_t> tr, std::span<const std::size_t> ev) {
    const auto model = classic::train(spec, X.select_rows(tr), gather_labels(y, tr), threads);
    return classic::predict(model, X.select_rows(ev));
  };
  return cross_validate(fp, y, folds);
}

std::vector<eval::MetricsReport> cross_validate(const classic::EstimatorSpec& spec,
                                                const RefitFeatures& refit,
                                                std::span<const int> y,
                                                const FoldAssignment& folds, unsigned threads) {
  if (refit.lexicon == nullptr) throw ConfigError("cross_validate: refit needs a lexicon");
  FitPredict fp = [&](std::span<const std::size_t> tr, std::span<const std::size_t> ev) {
    const auto train_docs = gather_docs(refit.docs, tr);
    const auto eval_docs = gather_docs(refit.docs, ev);
    const auto vocab = features::fit_vocabulary(train_docs, refit.max_terms, refit.ngrams);
    const auto Xtr = features::to_matrix(features::transform_corpus(train_docs, vocab, *refit.lexicon));
    const auto Xev = features::to_matrix(features::transform_corpus(eval_docs, vocab, *refit.lexicon));
    const auto model = classic::train(spec, Xtr, gather_labels(y, tr), threads);
    return classic::predict(model, Xev);
  };
  return cross_validate(fp, y, folds);
}

LeaderboardEntry make_entry(const classic::EstimatorSpec& spec,
                            std::vector<eval::MetricsReport> per_fold) {
  LeaderboardEntry e{spec, std::move(per_fold), 0, 0};
  if (e.per_fold.empty()) return e;
  double f1 = 0, acc = 0;
  for (const auto& m : e.per_fold) {
    f1 += m.f1;
    acc += m.accuracy;
  }
  e.mean_f1 = f1 / static_cast<double>(e.per_fold.size());
  e.mean_accuracy = acc / static_cast<double>(e.per_fold.size());
  return e;
}

Leaderboard rank(std::vector<LeaderboardEntry> entries) {
  if (entries.empty()) throw ConfigError("compare_models: no estimator specs given");
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.mean_f1 != b.mean_f1) return a.mean_f1 > b.mean_f1;
    if (a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
    const std::string fa = classic::family_name(a.spec.family);
    const std::string fb = classic::family_name(b.spec.family);
    if (fa != fb) return fa < fb;
    return a.spec.describe() < b.spec.describe();
  });
  return {std::move(entries), 0};
}

Leaderboard compare_models(std::span<const classic::EstimatorSpec> specs,
                           const features::SparseMatrix& X, std::span<const int> y,
                           const FoldAssignment& folds, unsigned threads) {
  if (specs.empty()) throw ConfigError("compare_models: no estimator specs given");
  std::vector<LeaderboardEntry> entries;
  for (const auto& s : specs) entries.push_back(make_entry(s, cross_validate(s, X, y, folds, threads)));
  return rank(std::move(entries));
}

Leaderboard compare_models(std::span<const classic::EstimatorSpec> specs,
                           const RefitFeatures& refit, std::span<const int> y,
                           const FoldAssignment& folds, unsigned threads) {
  if (specs.empty()) throw ConfigError("compare_models: no estimator specs given");
  std::vector<LeaderboardEntry> entries;
  for (const auto& s : specs)
    entries.push_back(make_entry(s, cross_validate(s, refit, y, folds, threads)));
  return rank(std::move(entries));
}

classic::TrainedModel refit_champion(const Leaderboard& board, const features::SparseMatrix& X,
                                     std::span<const int> y, unsigned threads) {
  if (board.entries.empty()) throw ConfigError("refit_champion: empty leaderboard");
  return classic::train(board.best().spec, X, y, threads);
}

std::string leaderboard_json(const Leaderboard& board) {
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < board.entries.size(); ++i) {
    const auto& e = board.entries[i];
    nlohmann::ordered_json j;
    j["rank"] = i + 1;
    j["family"] = classic::family_name(e.spec.family);
    j["spec"] = e.spec.describe();
    j["seed"] = e.spec.seed;
    auto f1 = nlohmann::ordered_json::array();
    auto acc = nlohmann::ordered_json::array();
    for (const auto& m : e.per_fold) {
      f1.push_back(m.f1);
      acc.push_back(m.accuracy);
    }
    j["fold_f1"] = f1;
    j["fold_accuracy"] = acc;
    j["mean_f1"] = e.mean_f1;
    j["mean_accuracy"] = e.mean_accuracy;
    j["champion"] = i == board.champion;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

std::string leaderboard_csv(const Leaderboard& board) {
  std::size_t k = 0;
  for (const auto& e : board.entries) k = std::max(k, e.per_fold.size());
  std::ostringstream out;
  out.precision(17);
  out << "family";
  for (std::size_t f = 0; f < k; ++f) out << ",f1_fold" << f;
  out << ",mean_f1,mean_accuracy,rank\n";
  for (std::size_t i = 0; i < board.entries.size(); ++i) {
    const auto& e = board.entries[i];
    out << csv_field(classic::family_name(e.spec.family));
    for (std::size_t f = 0; f < k; ++f) {
      out << ',';
      if (f < e.per_fold.size()) out << e.per_fold[f].f1;
    }
    out << ',' << e.mean_f1 << ',' << e.mean_accuracy << ',' << i + 1 << '\n';
  }
  return out.str();
}

}  // namespace hatebench::autobench
