#include "hatebench/app.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hatebench/checkpoint.hpp"
#include "hatebench/error.hpp"
#include "hatebench/rng.hpp"
#include "hatebench/svg.hpp"
#include "hatebench/table.hpp"

namespace hatebench::app {

namespace fs = std::filesystem;

// ---- Configuration ------------------------------------------------------------

void RunConfig::validate(bool need_data) const {
  if (need_data) {
    if (data_path.empty()) throw ConfigError("no dataset given (--data)");
    if (!fs::exists(data_path)) throw DataError("dataset not found: " + data_path);
  }
  for (const auto* p : {&slang_path, &stopwords_path, &lexicon_path})
    if (!p->empty() && !fs::exists(*p)) throw ConfigError("resource file not found: " + *p);
  if (!(test_fraction > 0 && test_fraction < 1)) throw ConfigError("test fraction must lie in (0, 1)");
  if (max_terms < 1) throw ConfigError("max_terms must be positive");
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (models.empty()) throw ConfigError("no estimators configured");
  if (out_dir.empty()) throw ConfigError("output directory must not be empty");
  estimator_specs();
  neural.validate();
}

std::string RunConfig::checkpoint() const {
  return checkpoint_path.empty() ? (fs::path(out_dir) / "model.ckpt").string() : checkpoint_path;
}

std::uint64_t RunConfig::seed_for(const std::string& label) const { return derive_seed(seed, label); }

std::vector<classic::EstimatorSpec> RunConfig::estimator_specs() const {
  std::vector<classic::EstimatorSpec> specs;
  for (const auto& name : models) {
    const auto family = classic::parse_family(name);
    std::map<std::string, double> hp;
    switch (family) {
      case classic::Family::NaiveBayes: hp = {{"alpha", nb_alpha}}; break;
      case classic::Family::LinearSvm:
        hp = {{"lambda", svm_lambda}, {"epochs", static_cast<double>(svm_epochs)}};
        break;
      case classic::Family::RandomForest:
        hp = {{"n_trees", static_cast<double>(rf_trees)},
              {"max_depth", static_cast<double>(rf_depth)},
              {"max_features", static_cast<double>(rf_max_features)}};
        break;
    }
    specs.push_back(classic::EstimatorSpec::make(
        family, hp, seed_for(std::string("model:") + classic::family_name(family))));
  }
  return specs;
}

namespace {

void log(const RunConfig& c, const std::string& msg) {
  if (!c.quiet) std::cerr << "[hatebench] " << msg << '\n';
}

// Prefixes errors with the pipeline stage while keeping their kind.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw_error(e.kind(), std::string(name) + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw IoError(std::string(name) + ": " + e.what());
  }
}

textprep::NormalizationResources parse_bundled(const char* slang, const char* stop, const char* lex) {
  textprep::NormalizationResources r;
  for (const auto& line : textprep::tokenize(std::string(slang))) {
    const auto comma = line.find(',');
    r.slang_map[line.substr(0, comma)] = textprep::tokenize(line.substr(comma + 1));
  }
  for (auto& t : textprep::tokenize(std::string(stop))) r.stopwords.insert(t);
  for (auto& t : textprep::tokenize(std::string(lex))) r.abusive_lexicon.insert(t);
  return r;
}

// Synthetic word lists. Not the released corpus resources.
constexpr const char* kBundledSlang =
    "gk,tidak ga,tidak tdk,tidak km,kamu yg,yang dgn,dengan bgt,banget sy,saya org,orang "
    "jd,jadi krn,karena blm,belum emg,memang bs,bisa tp,tapi sm,sama utk,untuk dr,dari "
    "aja,saja gmn,bagaimana kzl,kesal";
constexpr const char* kBundledStopwords =
    "yang dan di ke itu ini dengan untuk dari pada saja sama juga ada akan karena tapi";
constexpr const char* kHateTokens[] = {"bangsat", "bajingan", "keparat", "goblok", "tolol", "brengsek"};
constexpr const char* kMildTokens[] = {"anjing", "babi", "bodoh", "kampret", "sialan", "idiot"};
constexpr const char* kNeutralPhrases[] = {
    "harga beras naik lagi", "jalan tol macet bgt", "pemerintah janji program baru",
    "debat pemilu tadi malam", "gk sabar pulang kampung", "berita politik hari ini",
    "kampanye gubernur yg ramai", "km sudah nonton acara itu", "sy mau libur panjang",
    "tp pasar tetap buka"};
constexpr const char* kHashtags[] = {"pilkada", "jakarta", "berita", "politik"};

std::string lexicon_text() {
  std::string s;
  for (const char* t : kHateTokens) s += std::string(t) + " ";
  for (const char* t : kMildTokens) s += std::string(t) + " ";
  return s;
}

}  // namespace

textprep::NormalizationResources bundled_resources() {
  static const std::string lex = lexicon_text();
  return parse_bundled(kBundledSlang, kBundledStopwords, lex.c_str());
}

textprep::NormalizationResources load_resources(const RunConfig& c) {
  auto r = bundled_resources();
  if (c.slang_path.empty() || c.stopwords_path.empty() || c.lexicon_path.empty())
    log(c, "using bundled synthetic resources for unset resource paths");
  if (!c.slang_path.empty()) r.slang_map = textprep::load_slang_map(c.slang_path);
  if (!c.stopwords_path.empty()) r.stopwords = textprep::load_token_set(c.stopwords_path);
  if (!c.lexicon_path.empty()) r.abusive_lexicon = textprep::load_token_set(c.lexicon_path);
  if (r.abusive_lexicon.empty()) throw ConfigError("abusive lexicon is empty");
  return r;
}

// ---- Commands ---------------------------------------------------------------

corpus::CorpusStats cmd_eda(const RunConfig& c) {
  const auto rows = stage("ingest", [&] {
    c.validate();
    return corpus::load_corpus(c.data_path, c.columns);
  });
  const auto stats = corpus::corpus_stats(rows);
  stage("write", [&] { corpus::write_eda(stats, c.out_dir); });
  log(c, "eda: " + std::to_string(stats.total_rows) + " rows written to " + c.out_dir);
  return stats;
}

namespace {

struct Prepared {
  std::vector<corpus::LabeledTweet> rows;
  std::vector<int> y;
  corpus::DataSplit split;
  textprep::NormalizationResources resources;
};

Prepared prepare(const RunConfig& c) {
  Prepared p;
  stage("config", [&] { c.validate(); });
  p.rows = stage("ingest", [&] { return corpus::load_corpus(c.data_path, c.columns); });
  p.resources = stage("resources", [&] { return load_resources(c); });
  p.y = corpus::labels(p.rows, c.task);
  p.split = stage("split", [&] {
    return corpus::stratified_split(p.y, c.test_fraction, c.seed_for("split"));
  });
  return p;
}

std::vector<textprep::CleanDoc> preprocess_rows(const Prepared& p,
                                                std::span<const std::size_t> indices) {
  std::vector<textprep::CleanDoc> docs;
  docs.reserve(indices.size());
  for (auto i : indices) docs.push_back(textprep::preprocess(p.rows[i].text, p.resources));
  return docs;
}

std::vector<int> pick(std::span<const int> y, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(y[i]);
  return out;
}

nlohmann::ordered_json run_metadata(const RunConfig& c, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["data"] = c.data_path;
  j["task"] = corpus::task_name(c.task);
  j["seed"] = c.seed;
  j["test_fraction"] = c.test_fraction;
  return j;
}

eval::MetricsReport score_report(std::span<const int> truth, std::span<const int> predicted,
                                 std::span<const double> scores) {
  auto m = eval::metrics(eval::confusion(truth, predicted));
  const auto pos = std::count(truth.begin(), truth.end(), 1);
  if (pos > 0 && pos < static_cast<std::ptrdiff_t>(truth.size())) m.auc = eval::auc(truth, scores);
  return m;
}

std::string method_label(classic::Family f) { return classic::family_name(f); }

}  // namespace

BenchOutcome cmd_bench(const RunConfig& c) {
  Prepared p = prepare(c);
  BenchOutcome out;
  const auto& train_idx = p.split.train_indices;
  const auto y_train = pick(p.y, train_idx);
  out.n_train = train_idx.size();
  out.n_test = p.split.test_indices.size();
  log(c, "bench: " + std::to_string(out.n_train) + " train / " + std::to_string(out.n_test) +
             " test rows, task " + corpus::task_name(c.task));

  // Everything up to the refits sees training rows only.
  const auto train_docs = stage("preprocess", [&] { return preprocess_rows(p, train_idx); });
  const auto vocab = stage("features", [&] {
    return features::fit_vocabulary(train_docs, c.max_terms, c.ngrams);
  });
  const auto X_train = features::to_matrix(
      features::transform_corpus(train_docs, vocab, p.resources.abusive_lexicon));
  if (X_train.n_rows() != train_idx.size())
    throw TrainingError("internal: leaderboard input is not the training partition");

  const auto specs = stage("config", [&] { return c.estimator_specs(); });
  const auto folds = stage("folds", [&] {
    return autobench::kfold_stratified(y_train, c.folds, c.seed_for("folds"));
  });
  out.leaderboard = stage("compare", [&] {
    log(c, "cross-validating " + std::to_string(specs.size()) + " estimator(s), K=" +
               std::to_string(c.folds));
    if (c.per_fold_vocab) {
      autobench::RefitFeatures refit{train_docs, &p.resources.abusive_lexicon, c.max_terms, c.ngrams};
      return autobench::compare_models(specs, refit, y_train, folds, c.threads);
    }
    return autobench::compare_models(specs, X_train, y_train, folds, c.threads);
  });
  log(c, std::string("champion: ") + out.leaderboard.best().spec.describe());

  std::vector<classic::TrainedModel> refits;
  stage("refit", [&] {
    refits.push_back(autobench::refit_champion(out.leaderboard, X_train, y_train, c.threads));
    for (std::size_t i = 1; i < out.leaderboard.entries.size(); ++i)
      refits.push_back(classic::train(out.leaderboard.entries[i].spec, X_train, y_train, c.threads));
  });

  // Final evaluation: first and only time test rows are touched.
  const auto& test_idx = p.split.test_indices;
  const auto test_docs = stage("preprocess", [&] { return preprocess_rows(p, test_idx); });
  const auto X_test = features::to_matrix(
      features::transform_corpus(test_docs, vocab, p.resources.abusive_lexicon));
  const auto y_test = pick(p.y, test_idx);
  for (std::size_t i = 0; i < refits.size(); ++i) {
    const auto scores = classic::score(refits[i], X_test);
    const auto pred = classic::threshold_scores(scores, classic::default_threshold(refits[i].family));
    out.test_results.push_back({method_label(refits[i].family), score_report(y_test, pred, scores)});
    if (i == 0) out.champion_confusion = eval::confusion(y_test, pred);
  }

  stage("write", [&] {
    fs::create_directories(c.out_dir);
    const fs::path dir(c.out_dir);
    auto meta = run_metadata(c, "bench");
    meta["n_train"] = out.n_train;
    meta["n_test"] = out.n_test;
    meta["folds"] = c.folds;
    meta["max_terms"] = c.max_terms;
    meta["vocabulary_size"] = vocab.size();
    meta["feature_dim"] = vocab.size() + 1;
    meta["per_fold_vocab"] = c.per_fold_vocab;
    meta["champion"] = classic::family_name(out.leaderboard.best().spec.family);
    eval::ReportBundle bundle;
    bundle.run_metadata_json = meta.dump();
    bundle.leaderboard_json = autobench::leaderboard_json(out.leaderboard);
    bundle.methods = out.test_results;
    bundle.confusions = {{corpus::task_name(c.task), out.champion_confusion}};
    eval::emit_report(bundle, c.out_dir);
    write_text_file((dir / "leaderboard.csv").string(), autobench::leaderboard_csv(out.leaderboard));
    write_text_file((dir / "leaderboard.json").string(), autobench::leaderboard_json(out.leaderboard));
    features::save_vocabulary(vocab, (dir / "vocabulary.tsv").string());
    classic::save_model(refits.front(), (dir / "champion_model.json").string());
  });
  log(c, "bench: reports written to " + c.out_dir);
  return out;
}

namespace {

struct NeuralData {
  Prepared prepared;
  corpus::DataSplit val_split;  // indices into the training partition
  neural::TokenizerState tokenizer;
  neural::Dataset train, val;
  std::size_t dropped_empty = 0;
};

neural::Dataset encode_set(const std::vector<textprep::CleanDoc>& docs, std::span<const int> y,
                           const neural::TokenizerState& tok, std::size_t max_len,
                           std::size_t& dropped) {
  neural::Dataset d;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto seq = neural::encode_pad(docs[i], tok, max_len);
    if (seq.true_length == 0) {
      ++dropped;
      continue;
    }
    d.sequences.push_back(std::move(seq));
    d.labels.push_back(y[i]);
  }
  return d;
}

NeuralData prepare_neural(const RunConfig& c) {
  NeuralData nd;
  nd.prepared = prepare(c);
  const auto& p = nd.prepared;
  const auto& train_idx = p.split.train_indices;
  const auto y_train = pick(p.y, train_idx);
  nd.val_split = stage("split", [&] {
    return corpus::stratified_split(y_train, c.neural.val_fraction, c.seed_for("val"));
  });
  std::vector<std::size_t> fit_rows, val_rows;
  for (auto i : nd.val_split.train_indices) fit_rows.push_back(train_idx[i]);
  for (auto i : nd.val_split.test_indices) val_rows.push_back(train_idx[i]);

  const auto fit_docs = stage("preprocess", [&] { return preprocess_rows(p, fit_rows); });
  const auto val_docs = stage("preprocess", [&] { return preprocess_rows(p, val_rows); });
  nd.tokenizer = stage("tokenize", [&] { return neural::fit_tokenizer(fit_docs, c.neural.max_vocab); });
  nd.train = encode_set(fit_docs, pick(p.y, fit_rows), nd.tokenizer, c.neural.max_len, nd.dropped_empty);
  nd.val = encode_set(val_docs, pick(p.y, val_rows), nd.tokenizer, c.neural.max_len, nd.dropped_empty);
  if (nd.dropped_empty > 0)
    log(c, "dropped " + std::to_string(nd.dropped_empty) +
               " empty training/validation document(s) after preprocessing");
  return nd;
}

neural::ModelConfig model_config(const RunConfig& c) {
  auto m = c.neural;
  m.seed = c.seed_for("neural");
  return m;
}

struct TestEval {
  eval::MetricsReport metrics;
  eval::ConfusionMatrix cm;
};

TestEval evaluate_test(const RunConfig& c, const NeuralData& nd, const numerics::LayerParams& params) {
  const auto& p = nd.prepared;
  const auto& test_idx = p.split.test_indices;
  const auto docs = stage("preprocess", [&] { return preprocess_rows(p, test_idx); });
  std::vector<neural::PaddedSequence> seqs;
  seqs.reserve(docs.size());
  for (const auto& d : docs) {
    auto s = neural::encode_pad(d, nd.tokenizer, c.neural.max_len);
    if (s.true_length == 0) {
      // Nothing survived cleaning: score it as a single unknown token.
      s.ids[0] = neural::kOovId;
      s.true_length = 1;
    }
    seqs.push_back(std::move(s));
  }
  const auto probs = neural::predict_proba(params, seqs, c.neural.pooling);
  const auto y = pick(p.y, test_idx);
  const auto pred = classic::threshold_scores(probs, 0.5);
  return {score_report(y, pred, probs), eval::confusion(y, pred)};
}

std::map<std::string, std::string> checkpoint_header(const RunConfig& c, std::size_t vocab) {
  const auto& m = c.neural;
  return {{"format", "hatebench-cnn-bilstm"},
          {"task", corpus::task_name(c.task)},
          {"seed", std::to_string(c.seed)},
          {"vocab_size", std::to_string(vocab)},
          {"embedding_dim", std::to_string(m.embedding_dim)},
          {"max_len", std::to_string(m.max_len)},
          {"filters", std::to_string(m.filters)},
          {"kernel", std::to_string(m.kernel)},
          {"lstm_units", std::to_string(m.lstm_units)},
          {"pooling", m.pooling == numerics::Pooling::Max ? "max" : "last"}};
}

void write_neural_report(const RunConfig& c, const std::string& dir, const std::string& command,
                         const NeuralOutcome& out, bool with_curves) {
  auto meta = run_metadata(c, command);
  meta["n_train"] = out.n_train;
  meta["n_val"] = out.n_val;
  meta["n_test"] = out.n_test;
  meta["vocab_size"] = out.vocab_size;
  if (with_curves) {
    meta["epochs_run"] = out.log.epochs.size();
    meta["best_epoch"] = out.log.best_epoch + 1;
    meta["stopped_early"] = out.log.stopped_early;
  }
  eval::ReportBundle bundle;
  bundle.run_metadata_json = meta.dump();
  bundle.methods = {out.test_result};
  bundle.confusions = {{corpus::task_name(c.task), out.confusion}};
  if (with_curves)
    for (const auto& e : out.log.epochs)
      bundle.curves.push_back({e.train_loss, e.val_loss, e.train_auc, e.val_auc});
  eval::emit_report(bundle, dir);
  if (with_curves) write_text_file((fs::path(dir) / "curves.csv").string(), neural::curves_csv(out.log));
}

}  // namespace

NeuralOutcome cmd_train(const RunConfig& c) {
  NeuralData nd = prepare_neural(c);
  NeuralOutcome out;
  out.vocab_size = nd.tokenizer.vocab_size();
  out.n_train = nd.train.sequences.size();
  out.n_val = nd.val.sequences.size();
  out.n_test = nd.prepared.split.test_indices.size();
  const auto mc = model_config(c);
  log(c, "train: " + std::to_string(out.n_train) + " train / " + std::to_string(out.n_val) +
             " validation sequences, vocabulary " + std::to_string(out.vocab_size));

  auto result = stage("train", [&] {
    auto params = neural::build_model(mc, nd.tokenizer.vocab_size());
    return neural::train(std::move(params), nd.train, nd.val, mc);
  });
  out.log = result.log;
  for (std::size_t e = 0; e < out.log.epochs.size(); ++e) {
    const auto& r = out.log.epochs[e];
    log(c, "epoch " + std::to_string(e + 1) + ": train_loss " + svg::num(r.train_loss, 4) +
               " val_loss " + svg::num(r.val_loss, 4) + " val_auc " + svg::num(r.val_auc, 4));
  }

  const auto test = evaluate_test(c, nd, result.params);
  out.test_result = {"cnn_bilstm", test.metrics};
  out.confusion = test.cm;

  stage("write", [&] {
    fs::create_directories(c.out_dir);
    numerics::write_checkpoint(
        numerics::make_checkpoint(result.params, checkpoint_header(c, nd.tokenizer.vocab_size())),
        c.checkpoint());
    write_neural_report(c, c.out_dir, "train", out, true);
  });
  log(c, "train: reports written to " + c.out_dir);
  return out;
}

NeuralOutcome cmd_evaluate(const RunConfig& c) {
  if (!fs::exists(c.checkpoint())) throw IoError("checkpoint not found: " + c.checkpoint());
  NeuralData nd = prepare_neural(c);
  const auto mc = model_config(c);
  auto params = numerics::LayerParams::zeros(
      {nd.tokenizer.vocab_size(), mc.embedding_dim, mc.kernel, mc.filters, mc.lstm_units});
  stage("checkpoint", [&] {
    const auto ckpt = numerics::read_checkpoint(c.checkpoint());
    numerics::load_parameters(ckpt, params);
    const auto expected = checkpoint_header(c, nd.tokenizer.vocab_size());
    for (const char* key : {"pooling", "task"}) {
      const auto it = ckpt.header.find(key);
      if (it != ckpt.header.end() && it->second != expected.at(key))
        throw ConfigError(std::string("checkpoint ") + key + " '" + it->second +
                          "' does not match configuration '" + expected.at(key) + "'");
    }
  });
  NeuralOutcome out;
  out.vocab_size = nd.tokenizer.vocab_size();
  out.n_train = nd.train.sequences.size();
  out.n_val = nd.val.sequences.size();
  out.n_test = nd.prepared.split.test_indices.size();
  const auto test = evaluate_test(c, nd, params);
  out.test_result = {"cnn_bilstm", test.metrics};
  out.confusion = test.cm;
  const auto dir = (fs::path(c.out_dir) / "evaluate").string();
  stage("write", [&] { write_neural_report(c, dir, "evaluate", out, false); });
  log(c, "evaluate: reports written to " + dir);
  return out;
}

// ---- Synthetic corpus -------------------------------------------------------

std::vector<corpus::LabeledTweet> make_synthetic_corpus(const SyntheticOptions& o) {
  if (o.n < 20) throw ConfigError("synthetic corpus needs at least 20 rows");
  if (!(o.label_noise >= 0 && o.label_noise < 0.5)) throw ConfigError("label noise must lie in [0, 0.5)");
  Rng rng(derive_seed(o.seed, "synthetic"));
  const auto n_pos = static_cast<std::size_t>(std::llround(0.42 * static_cast<double>(o.n)));
  std::vector<int> hs(o.n, 0);
  std::fill_n(hs.begin(), n_pos, 1);
  std::shuffle(hs.begin(), hs.end(), rng);

  auto pick_from = [&](const auto& list) {
    const std::size_t size = std::size(list);
    return std::string(list[std::uniform_int_distribution<std::size_t>(0, size - 1)(rng)]);
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto shout = [&](std::string w) {
    if (unit(rng) < 0.3)
      for (auto& ch : w) ch = static_cast<char>(ch - 'a' + 'A');
    if (unit(rng) < 0.3) w += "!!";
    return w;
  };

  std::vector<corpus::LabeledTweet> rows;
  rows.reserve(o.n);
  for (std::size_t r = 0; r < o.n; ++r) {
    const std::size_t len = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
    std::vector<std::string> words;
    for (std::size_t k = 0; k < len; ++k) words.push_back(pick_from(kNeutralPhrases));
    bool abusive = false;
    auto insert = [&](std::string w) {
      const auto at = std::uniform_int_distribution<std::size_t>(0, words.size())(rng);
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), std::move(w));
      abusive = true;
    };
    if (hs[r]) {
      const int count = unit(rng) < 0.3 ? 2 : 1;
      for (int k = 0; k < count; ++k) insert("dasar " + shout(pick_from(kHateTokens)));
    }
    if (unit(rng) < 0.3) insert(shout(pick_from(kMildTokens)));

    std::string text;
    if (unit(rng) < 0.2) text = "RT USER: ";
    else if (unit(rng) < 0.3) text = "USER ";
    for (std::size_t k = 0; k < words.size(); ++k) text += (k ? " " : "") + words[k];
    if (unit(rng) < 0.15) text += " URL";
    if (unit(rng) < 0.1) text += " #" + pick_from(kHashtags);

    int label = hs[r];
    if (o.label_noise > 0 && unit(rng) < o.label_noise) label = 1 - label;
    rows.push_back({std::move(text), label, abusive ? 1 : 0});
  }
  return rows;
}

std::string synthetic_csv(const std::vector<corpus::LabeledTweet>& rows) {
  std::string out = "Tweet,HS,Abusive\n";
  for (const auto& r : rows)
    out += csv_field(r.text) + "," + std::to_string(r.hs) + "," + std::to_string(r.abusive) + "\n";
  return out;
}

void write_synthetic_corpus(const SyntheticOptions& o, const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  write_text_file(path, synthetic_csv(make_synthetic_corpus(o)));
}

}  // namespace hatebench::app
