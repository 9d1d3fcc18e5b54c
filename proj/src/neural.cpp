#include "hatebench/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "hatebench/error.hpp"
#include "hatebench/eval.hpp"
#include "hatebench/rng.hpp"

namespace hatebench::neural {

using numerics::LayerParams;
using numerics::Tensor;

std::int32_t TokenizerState::lookup(const std::string& token) const {
  const auto it = ids.find(token);
  return it == ids.end() ? kOovId : it->second;
}

TokenizerState fit_tokenizer(std::span<const textprep::CleanDoc> docs, std::size_t max_vocab) {
  if (docs.empty()) throw DataError("fit_tokenizer: empty document list");
  if (max_vocab < 2) throw ConfigError("fit_tokenizer: max_vocab must be at least 2");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& d : docs)
    for (const auto& t : d.tokens) ++freq[t];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_vocab - 2) ranked.resize(max_vocab - 2);
  TokenizerState tok;
  tok.tokens = {"<pad>", "<oov>"};
  for (const auto& [token, count] : ranked) {
    tok.ids.emplace(token, static_cast<std::int32_t>(tok.tokens.size()));
    tok.tokens.push_back(token);
  }
  return tok;
}

PaddedSequence encode_pad(const textprep::CleanDoc& doc, const TokenizerState& tok,
                          std::size_t max_len) {
  PaddedSequence s;
  s.ids.assign(max_len, kPadId);
  s.true_length = std::min(doc.tokens.size(), max_len);
  for (std::size_t i = 0; i < s.true_length; ++i) s.ids[i] = tok.lookup(doc.tokens[i]);
  return s;
}

void ModelConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("model config: ") + what);
  };
  need(embedding_dim > 0, "embedding_dim must be positive");
  need(max_len > 0, "max_len must be positive");
  need(filters > 0, "filters must be positive");
  need(kernel > 0 && kernel % 2 == 1, "kernel must be a positive odd number");
  need(lstm_units > 0, "lstm_units must be positive");
  need(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  need(learning_rate > 0.0, "learning_rate must be positive");
  need(batch_size > 0, "batch_size must be positive");
  need(max_epochs > 0, "max_epochs must be positive");
  need(patience > 0, "patience must be positive");
  need(val_fraction > 0.0 && val_fraction < 1.0, "val_fraction must lie in (0, 1)");
  need(max_vocab >= 2, "max_vocab must be at least 2");
}

LayerParams build_model(const ModelConfig& c, std::size_t vocab_size) {
  c.validate();
  if (vocab_size < 2) throw ConfigError("build_model: vocab_size must be at least 2");
  const numerics::ModelDims dims{vocab_size, c.embedding_dim, c.kernel, c.filters, c.lstm_units};
  LayerParams p = LayerParams::zeros(dims);
  Rng rng(derive_seed(c.seed, "init"));
  const auto d = static_cast<double>(c.embedding_dim);
  const auto k = static_cast<double>(c.kernel);
  const auto f = static_cast<double>(c.filters);
  const auto h = static_cast<double>(c.lstm_units);

  numerics::glorot_uniform(p.embedding, static_cast<double>(vocab_size), d, rng);
  std::fill_n(p.embedding.data(), c.embedding_dim, 0.0);  // pad row
  numerics::glorot_uniform(p.conv_w, k * d, k * f, rng);
  for (auto* dir : {&p.forward, &p.backward}) {
    for (Tensor* w : {&dir->W_i, &dir->W_f, &dir->W_o, &dir->W_g})
      numerics::glorot_uniform(*w, f, h, rng);
    for (Tensor* u : {&dir->U_i, &dir->U_f, &dir->U_o, &dir->U_g}) numerics::orthogonal(*u, rng);
    dir->b_f.fill(1.0);
  }
  numerics::glorot_uniform(p.out_w, 2 * h, 1, rng);
  return p;
}

bool EarlyStopping::update(double loss) {
  const bool improved = !any_ || loss < best_;
  if (improved) {
    best_ = loss;
    best_epoch_ = epoch_;
    wait_ = 0;
    any_ = true;
  } else {
    ++wait_;
  }
  ++epoch_;
  return improved;
}

namespace {

void check_dataset(const Dataset& d, const char* which) {
  if (d.sequences.empty()) throw DataError(std::string(which) + " set is empty");
  if (d.sequences.size() != d.labels.size())
    throw DataError(std::string(which) + " set: sequence/label count mismatch");
  for (std::size_t i = 0; i < d.sequences.size(); ++i)
    if (d.sequences[i].true_length == 0)
      throw DataError(std::string(which) + " set: sequence " + std::to_string(i) +
                      " is all padding (empty document); drop it before training");
}

double safe_auc(std::span<const int> y, std::span<const double> scores) {
  const auto pos = std::count(y.begin(), y.end(), 1);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size()))
    return std::numeric_limits<double>::quiet_NaN();
  return eval::auc(y, scores);
}

std::vector<double> as_double(std::span<const int> y) { return {y.begin(), y.end()}; }

}  // namespace

std::vector<double> predict_proba(const LayerParams& params, std::span<const PaddedSequence> seqs,
                                  numerics::Pooling pooling) {
  std::vector<double> out;
  out.reserve(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].true_length == 0)
      throw DataError("predict_proba: sequence " + std::to_string(i) + " is all padding");
    out.push_back(numerics::forward_sequence(params, seqs[i].content(), pooling));
  }
  return out;
}

double evaluate_loss(const LayerParams& params, const Dataset& data, numerics::Pooling pooling) {
  const auto probs = predict_proba(params, data.sequences, pooling);
  return numerics::bce_loss(probs, as_double(data.labels)).loss;
}

TrainResult train(LayerParams params, const Dataset& train_set, const Dataset& val_set,
                  const ModelConfig& config) {
  config.validate();
  check_dataset(train_set, "training");
  check_dataset(val_set, "validation");

  numerics::AdamState adam =
      numerics::AdamState::for_params(params, {config.learning_rate, 0.9, 0.999, 1e-8});
  LayerParams grads = LayerParams::zeros(params.dims());
  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  const std::size_t n = train_set.sequences.size();
  const std::size_t hidden2 = 2 * config.lstm_units;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto val_y = as_double(val_set.labels);

  TrainResult result{params, {}};
  EarlyStopping stopper(config.patience);
  std::vector<double> epoch_probs(n);
  std::vector<int> epoch_labels(n);

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0;
    for (std::size_t start = 0, batch = 0; start < n; start += config.batch_size, ++batch) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const double batch_n = static_cast<double>(end - start);
      grads.set_zero();
      numerics::SequenceCache cache;
      double batch_loss = 0;
      for (std::size_t b = start; b < end; ++b) {
        const auto& seq = train_set.sequences[order[b]];
        const double y = train_set.labels[order[b]];
        numerics::DropoutMasks masks;
        if (config.dropout > 0)
          masks = numerics::sample_dropout(seq.true_length, config.filters, hidden2,
                                           config.dropout, dropout_rng);
        const double prob = numerics::forward_sequence(
            params, seq.content(), config.pooling, config.dropout > 0 ? &masks : nullptr, &cache);
        const double yhat[1] = {prob};
        const double ys[1] = {y};
        const auto bce = numerics::bce_loss(yhat, ys);
        batch_loss += bce.loss;
        // Per-example share of the batch mean, chained through the sigmoid.
        const double d_logit = bce.grad[0] / batch_n * prob * (1.0 - prob);
        numerics::backward_sequence(params, cache, d_logit, config.pooling, grads);
        epoch_probs[b] = prob;
        epoch_labels[b] = train_set.labels[order[b]];
      }
      if (!std::isfinite(batch_loss) || !grads.all_finite())
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(batch + 1));
      loss_sum += batch_loss;
      numerics::adam_step(params, grads, adam);
    }

    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.train_auc = safe_auc(epoch_labels, epoch_probs);
    const auto val_probs = predict_proba(params, val_set.sequences, config.pooling);
    rec.val_loss = numerics::bce_loss(val_probs, val_y).loss;
    rec.val_auc = safe_auc(val_set.labels, val_probs);
    if (!std::isfinite(rec.val_loss))
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch + 1));
    result.log.epochs.push_back(rec);

    if (stopper.update(rec.val_loss)) result.params = params;
    if (stopper.should_stop()) {
      result.log.stopped_early = epoch + 1 < config.max_epochs;
      break;
    }
  }
  result.log.best_epoch = stopper.best_epoch();
  return result;
}

std::string curves_csv(const TrainingLog& log) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,val_loss,train_auc,val_auc\n";
  for (std::size_t e = 0; e < log.epochs.size(); ++e) {
    const auto& r = log.epochs[e];
    out << e + 1 << ',' << r.train_loss << ',' << r.val_loss << ',' << r.train_auc << ','
        << r.val_auc << '\n';
  }
  return out.str();
}

}  // namespace hatebench::neural
