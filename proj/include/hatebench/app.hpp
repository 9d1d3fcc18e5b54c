#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hatebench/autobench.hpp"
#include "hatebench/corpus.hpp"
#include "hatebench/eval.hpp"
#include "hatebench/neural.hpp"

namespace hatebench::app {

/// One run's configuration. Both branches read the same dataset, task,
/// seed and split fraction, so they are evaluated on the identical split.
struct RunConfig {
  std::string data_path;
  corpus::ColumnMap columns;
  // Empty paths fall back to the bundled synthetic resources.
  std::string slang_path, stopwords_path, lexicon_path;
  corpus::Task task = corpus::Task::HateSpeech;
  std::uint64_t seed = 42;
  double test_fraction = 0.2;

  // Conventional branch.
  std::size_t max_terms = 5000;
  features::NgramRange ngrams;
  std::size_t folds = 5;
  bool per_fold_vocab = false;
  std::vector<std::string> models = {"naive_bayes", "linear_svm", "random_forest"};
  double nb_alpha = 1.0;
  double svm_lambda = 1e-4;
  std::size_t svm_epochs = 20;
  std::size_t rf_trees = 200;
  std::size_t rf_depth = 32;
  std::size_t rf_max_features = 0;

  neural::ModelConfig neural;

  std::string out_dir = "out";
  std::string checkpoint_path;  // defaults to <out_dir>/model.ckpt
  unsigned threads = default_threads();
  bool quiet = false;

  /// Checks paths and value ranges; throws ConfigError.
  void validate(bool need_data = true) const;
  std::string checkpoint() const;
  /// Seed of one consumer of randomness: "split", "folds", "val",
  /// "model:<family>", ...
  std::uint64_t seed_for(const std::string& label) const;
  std::vector<classic::EstimatorSpec> estimator_specs() const;
};

/// The small synthetic resource set used when no resource files are given.
textprep::NormalizationResources bundled_resources();
textprep::NormalizationResources load_resources(const RunConfig& config);

corpus::CorpusStats cmd_eda(const RunConfig& config);

struct BenchOutcome {
  autobench::Leaderboard leaderboard;
  std::vector<eval::MethodResult> test_results;  // leaderboard order
  eval::ConfusionMatrix champion_confusion;
  std::size_t n_train = 0, n_test = 0;
};

BenchOutcome cmd_bench(const RunConfig& config);

struct NeuralOutcome {
  eval::MethodResult test_result;
  eval::ConfusionMatrix confusion;
  neural::TrainingLog log;
  std::size_t vocab_size = 0;
  std::size_t n_train = 0, n_val = 0, n_test = 0;
};

NeuralOutcome cmd_train(const RunConfig& config);
NeuralOutcome cmd_evaluate(const RunConfig& config);

struct SyntheticOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 7;
  double label_noise = 0.0;
};

/// Tweets from a small vocabulary. A row is HS=1 exactly when it contains
/// one of the designated hate tokens (before optional label noise); Abusive=1
/// when it contains any bundled lexicon token. 42% of rows are positive.
std::vector<corpus::LabeledTweet> make_synthetic_corpus(const SyntheticOptions& options);
std::string synthetic_csv(const std::vector<corpus::LabeledTweet>& rows);
void write_synthetic_corpus(const SyntheticOptions& options, const std::string& path);

}  // namespace hatebench::app
