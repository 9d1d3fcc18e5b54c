#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hatebench/numerics.hpp"
#include "hatebench/textprep.hpp"

namespace hatebench::neural {

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kOovId = 1;

/// Token ids: 0 = pad, 1 = out-of-vocabulary, content from 2 upwards.
struct TokenizerState {
  std::unordered_map<std::string, std::int32_t> ids;
  std::vector<std::string> tokens;  // id -> token, including "<pad>" and "<oov>"

  std::size_t vocab_size() const { return tokens.size(); }
  std::int32_t lookup(const std::string& token) const;
};

/// Ranks tokens by training frequency (ties lexicographic) and keeps the top
/// max_vocab - 2.
TokenizerState fit_tokenizer(std::span<const textprep::CleanDoc> docs, std::size_t max_vocab);

struct PaddedSequence {
  std::vector<std::int32_t> ids;  // exactly max_len, post-padded with 0
  std::size_t true_length = 0;

  std::span<const std::int32_t> content() const { return {ids.data(), true_length}; }
};

/// Keeps the first max_len tokens.
PaddedSequence encode_pad(const textprep::CleanDoc& doc, const TokenizerState& tok,
                          std::size_t max_len);

struct ModelConfig {
  std::size_t embedding_dim = 100;
  std::size_t max_len = 50;
  std::size_t filters = 64;
  std::size_t kernel = 3;
  std::size_t lstm_units = 50;
  double dropout = 0.2;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 20;
  std::size_t patience = 3;
  std::uint64_t seed = 42;
  double val_fraction = 0.1;
  std::size_t max_vocab = 20000;
  numerics::Pooling pooling = numerics::Pooling::Max;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
};

numerics::LayerParams build_model(const ModelConfig& config, std::size_t vocab_size);

struct EpochRecord {
  double train_loss = 0, train_auc = 0, val_loss = 0, val_auc = 0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0-based, minimises val_loss
  bool stopped_early = false;
};

/// Patience-based stopping on a monitored loss. A value counts as an
/// improvement only when strictly below the best so far.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}
  /// Returns true when this epoch improved on the best.
  bool update(double loss);
  bool should_stop() const { return wait_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t wait_ = 0;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = 0;
  bool any_ = false;
};

struct Dataset {
  std::vector<PaddedSequence> sequences;
  std::vector<int> labels;
};

struct TrainResult {
  numerics::LayerParams params;  // restored from best_epoch
  TrainingLog log;
};

/// Mini-batch Adam on mean BCE with per-epoch validation and restore-best
/// early stopping. Deterministic for a fixed config seed.
TrainResult train(numerics::LayerParams params, const Dataset& train_set, const Dataset& val_set,
                  const ModelConfig& config);

/// Inference-mode probabilities (no dropout), one per sequence.
std::vector<double> predict_proba(const numerics::LayerParams& params,
                                  std::span<const PaddedSequence> sequences,
                                  numerics::Pooling pooling = numerics::Pooling::Max);

/// Mean BCE of inference-mode predictions.
double evaluate_loss(const numerics::LayerParams& params, const Dataset& data,
                     numerics::Pooling pooling = numerics::Pooling::Max);

std::string curves_csv(const TrainingLog& log);

}  // namespace hatebench::neural
