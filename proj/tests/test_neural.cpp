#include <doctest.h>

#include <algorithm>
#include <random>

#include "hatebench/error.hpp"
#include "hatebench/neural.hpp"
#include "support.hpp"

using namespace hatebench;
using hbtest::doc;

namespace {

neural::ModelConfig small_config() {
  neural::ModelConfig c;
  c.embedding_dim = 8;
  c.filters = 6;
  c.lstm_units = 4;
  c.max_len = 12;
  c.batch_size = 8;
  c.max_epochs = 6;
  c.seed = 5;
  return c;
}

neural::Dataset toy_dataset(std::size_t n, std::uint64_t seed, std::size_t vocab, std::size_t max_len) {
  std::mt19937_64 rng(seed);
  neural::Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    neural::PaddedSequence s;
    s.ids.assign(max_len, neural::kPadId);
    s.true_length = 2 + rng() % (max_len - 2);
    const int label = static_cast<int>(i % 2);
    for (std::size_t t = 0; t < s.true_length; ++t) s.ids[t] = static_cast<std::int32_t>(3 + rng() % (vocab - 3));
    if (label) s.ids[rng() % s.true_length] = 2;  // token 2 marks positives
    d.sequences.push_back(s);
    d.labels.push_back(label);
  }
  return d;
}

}  // namespace

TEST_CASE("tokenizer ranks by frequency and maps unknown tokens to oov") {
  std::vector<textprep::CleanDoc> docs = {doc({"a", "b"}), doc({"b"})};
  const auto tok = neural::fit_tokenizer(docs, 100);
  CHECK(tok.lookup("b") == 2);
  CHECK(tok.lookup("a") == 3);
  CHECK(tok.lookup("zzz") == neural::kOovId);
  CHECK(tok.vocab_size() == 4);
  const auto capped = neural::fit_tokenizer(docs, 3);
  CHECK(capped.vocab_size() == 3);
  CHECK(capped.lookup("b") == 2);
  CHECK(capped.lookup("a") == neural::kOovId);
}

TEST_CASE("encode_pad") {
  std::vector<textprep::CleanDoc> docs = {doc({"a", "b", "c"})};
  const auto tok = neural::fit_tokenizer(docs, 100);
  const auto s = neural::encode_pad(docs[0], tok, 50);
  CHECK(s.ids.size() == 50);
  CHECK(s.true_length == 3);
  CHECK(std::count(s.ids.begin(), s.ids.end(), neural::kPadId) == 47);
  CHECK(std::all_of(s.ids.begin(), s.ids.begin() + 3, [](auto id) { return id >= 2; }));

  textprep::CleanDoc longdoc;
  for (int i = 0; i < 60; ++i) longdoc.tokens.push_back("a");
  const auto t = neural::encode_pad(longdoc, tok, 50);
  CHECK(t.ids.size() == 50);
  CHECK(t.true_length == 50);
  const auto e = neural::encode_pad(doc({}), tok, 50);
  CHECK(e.true_length == 0);
  CHECK(std::all_of(e.ids.begin(), e.ids.end(), [](auto id) { return id == neural::kPadId; }));
}

TEST_CASE("build_model shapes and determinism") {
  neural::ModelConfig c;
  const auto p = neural::build_model(c, 10000);
  CHECK(p.embedding.shape() == std::vector<std::size_t>{10000, 100});
  CHECK(p.conv_w.shape() == std::vector<std::size_t>{3, 100, 64});
  CHECK(p.out_w.size() == 100);
  for (std::size_t j = 0; j < 100; ++j) CHECK(p.embedding[j] == 0.0);
  CHECK(neural::build_model(c, 50) == neural::build_model(c, 50));
  c.dropout = 0.0;
  CHECK_NOTHROW(neural::build_model(c, 50));
  c.kernel = 4;
  CHECK_THROWS_AS(neural::build_model(c, 50), ConfigError);
}

TEST_CASE("early stopping keeps the best epoch") {
  neural::EarlyStopping worse(1);
  CHECK(worse.update(1.0));
  CHECK_FALSE(worse.should_stop());
  CHECK_FALSE(worse.update(1.1));
  CHECK(worse.should_stop());
  CHECK(worse.best_epoch() == 0);

  neural::EarlyStopping s(2);
  for (double v : {0.9, 0.7, 0.75, 0.6, 0.61, 0.62}) s.update(v);
  CHECK(s.should_stop());
  CHECK(s.best_epoch() == 3);
  CHECK(s.best_loss() == 0.6);

  neural::EarlyStopping equal(1);
  equal.update(0.5);
  CHECK_FALSE(equal.update(0.5));
}

TEST_CASE("training log, restore-best and determinism") {
  auto c = small_config();
  const auto train = toy_dataset(48, 1, 12, c.max_len);
  const auto val = toy_dataset(16, 2, 12, c.max_len);
  const auto r = neural::train(neural::build_model(c, 12), train, val, c);
  CHECK(r.log.epochs.size() <= c.max_epochs);
  CHECK(r.log.best_epoch < r.log.epochs.size());
  const double best = r.log.epochs[r.log.best_epoch].val_loss;
  for (const auto& e : r.log.epochs) CHECK(best <= e.val_loss);
  CHECK(std::abs(neural::evaluate_loss(r.params, val, c.pooling) - best) < 1e-12);

  const auto again = neural::train(neural::build_model(c, 12), train, val, c);
  CHECK(again.params == r.params);
  CHECK(neural::curves_csv(again.log) == neural::curves_csv(r.log));

  auto bad = train;
  bad.sequences[0].true_length = 0;
  CHECK_THROWS(neural::train(neural::build_model(c, 12), bad, val, c));
}

TEST_CASE("inference purity and pad invariance") {
  auto c = small_config();
  auto p = neural::build_model(c, 12);
  auto data = toy_dataset(10, 3, 12, c.max_len);
  const auto probs = neural::predict_proba(p, data.sequences);

  auto dup = data.sequences;
  dup.push_back(dup[0]);
  const auto dprobs = neural::predict_proba(p, dup);
  CHECK(dprobs.back() == probs[0]);

  auto perm = data.sequences;
  std::reverse(perm.begin(), perm.end());
  const auto pprobs = neural::predict_proba(p, perm);
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(pprobs[i] == probs[perm.size() - 1 - i]);

  for (auto& s : data.sequences) s.ids.resize(s.ids.size() + 25, neural::kPadId);
  const auto extended = neural::predict_proba(p, data.sequences);
  for (std::size_t i = 0; i < probs.size(); ++i) CHECK(std::abs(extended[i] - probs[i]) <= 1e-12);

  p.out_w.fill(0.0);
  p.out_b.fill(0.0);
  for (double v : neural::predict_proba(p, data.sequences)) CHECK(v == 0.5);
}
