#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hatebench/classic.hpp"
#include "hatebench/eval.hpp"

namespace hatebench::autobench {

struct FoldAssignment {
  std::size_t k = 5;
  std::vector<std::size_t> fold_of;  // row -> fold id
  std::uint64_t seed = 0;

  std::vector<std::size_t> rows_in(std::size_t fold) const;
  std::vector<std::size_t> rows_outside(std::size_t fold) const;
};

/// Shuffles each class separately and deals its rows round-robin across folds.
FoldAssignment kfold_stratified(std::span<const int> y, std::size_t k, std::uint64_t seed);

struct LeaderboardEntry {
  classic::EstimatorSpec spec;
  std::vector<eval::MetricsReport> per_fold;
  double mean_f1 = 0;
  double mean_accuracy = 0;
};

struct Leaderboard {
  std::vector<LeaderboardEntry> entries;  // best first
  std::size_t champion = 0;
  const LeaderboardEntry& best() const { return entries.at(champion); }
};

/// Anything that can be fitted on rows and then predict labels. The real
/// estimators go through classic::train; tests plug in stubs.
using FitPredict = std::function<std::vector<int>(std::span<const std::size_t> train_rows,
                                                  std::span<const std::size_t> eval_rows)>;

/// One MetricsReport per fold, in fold order. A training failure is
/// rethrown as TrainingError naming the fold.
std::vector<eval::MetricsReport> cross_validate(const FitPredict& model, std::span<const int> y,
                                                const FoldAssignment& folds);

std::vector<eval::MetricsReport> cross_validate(const classic::EstimatorSpec& spec,
                                                const features::SparseMatrix& X,
                                                std::span<const int> y,
                                                const FoldAssignment& folds,
                                                unsigned threads = default_threads());

/// Refits the TF-IDF vocabulary on each fold's training rows instead of
/// reusing one representation for every fold.
struct RefitFeatures {
  std::span<const textprep::CleanDoc> docs;
  const std::unordered_set<std::string>* lexicon = nullptr;
  std::size_t max_terms = 5000;
  features::NgramRange ngrams;
};

std::vector<eval::MetricsReport> cross_validate(const classic::EstimatorSpec& spec,
                                                const RefitFeatures& refit,
                                                std::span<const int> y,
                                                const FoldAssignment& folds,
                                                unsigned threads = default_threads());

LeaderboardEntry make_entry(const classic::EstimatorSpec& spec,
                            std::vector<eval::MetricsReport> per_fold);

/// Orders by mean F1, then mean accuracy (both descending), then family
/// name and the spec description ascending.
Leaderboard rank(std::vector<LeaderboardEntry> entries);

Leaderboard compare_models(std::span<const classic::EstimatorSpec> specs,
                           const features::SparseMatrix& X, std::span<const int> y,
                           const FoldAssignment& folds, unsigned threads = default_threads());

Leaderboard compare_models(std::span<const classic::EstimatorSpec> specs,
                           const RefitFeatures& refit, std::span<const int> y,
                           const FoldAssignment& folds, unsigned threads = default_threads());

classic::TrainedModel refit_champion(const Leaderboard& board, const features::SparseMatrix& X,
                                     std::span<const int> y, unsigned threads = default_threads());

std::string leaderboard_json(const Leaderboard& board);
std::string leaderboard_csv(const Leaderboard& board);

}  // namespace hatebench::autobench
