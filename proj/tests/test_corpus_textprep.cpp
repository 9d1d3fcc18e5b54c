#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "hatebench/corpus.hpp"
#include "hatebench/error.hpp"
#include "hatebench/table.hpp"
#include "hatebench/textprep.hpp"
#include "support.hpp"

using namespace hatebench;
using textprep::Tokens;

TEST_CASE("delimited parsing handles quotes, delimiters and BOM") {
  const std::string text = "a,b\n\"x, \"\"y\"\"\",2\n";
  auto t = parse_delimited(text, detect_delimiter(text));
  CHECK(t.delimiter == ',');
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0] == "x, \"y\"");
  CHECK(detect_delimiter("Tweet;HS;Abusive\n") == ';');
  CHECK(detect_delimiter("Tweet\tHS\n") == '\t');

  hbtest::TempDir dir;
  const auto path = dir.write("bom.csv", "\xEF\xBB\xBFTweet,HS,Abusive\nhalo,0,1\n");
  CHECK(read_delimited_file(path).header[0] == "Tweet");
}

TEST_CASE("load_corpus reads rows in order") {
  hbtest::TempDir dir;
  const auto path = dir.write("c.csv", "Tweet,HS,Abusive\nsatu,1,0\ndua,0,0\n\"tiga, empat\",1,1\n");
  const auto rows = corpus::load_corpus(path);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].text == "satu");
  CHECK(rows[1].hs == 0);
  CHECK(rows[2].text == "tiga, empat");
  CHECK(rows[2].abusive == 1);
  CHECK(corpus::labels(rows, corpus::Task::Abusive) == std::vector<int>{0, 0, 1});
}

TEST_CASE("load_corpus rejects non-binary labels naming the line") {
  hbtest::TempDir dir;
  const auto path = dir.write("bad.csv", "Tweet,HS,Abusive\nok,1,0\nbad,2,0\n");
  try {
    corpus::load_corpus(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(corpus::load_corpus(dir.file("absent.csv")), DataError);
  const auto nocol = dir.write("nocol.csv", "Text,HS,Abusive\nx,1,0\n");
  CHECK_THROWS_AS(corpus::load_corpus(nocol), DataError);
}

TEST_CASE("corpus_stats") {
  std::vector<corpus::LabeledTweet> rows = {{"a b", 1, 0}, {"a b c d", 0, 1}};
  const auto s = corpus::corpus_stats(rows);
  CHECK(s.total_rows == 2);
  CHECK(s.mean_length == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(s.hs_counts == corpus::ClassCounts{1, 1});
  CHECK(s.length_histogram.at(2) == 1);
  CHECK(s.length_histogram.at(4) == 1);
  CHECK_THROWS_AS(corpus::corpus_stats({}), DataError);
}

TEST_CASE("stratified_split keeps class proportions and is deterministic") {
  std::vector<int> y = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  const auto s = corpus::stratified_split(y, 0.2, 11);
  REQUIRE(s.test_indices.size() == 2);
  CHECK(y[s.test_indices[0]] + y[s.test_indices[1]] == 1);
  CHECK(s.train_indices.size() == 8);
  const auto again = corpus::stratified_split(y, 0.2, 11);
  CHECK(again.test_indices == s.test_indices);
  CHECK(again.train_indices == s.train_indices);

  std::set<std::size_t> all(s.train_indices.begin(), s.train_indices.end());
  all.insert(s.test_indices.begin(), s.test_indices.end());
  CHECK(all.size() == 10);

  // Per-class rounding reproduces the published test size on the published counts.
  std::vector<int> big(13130, 0);
  std::fill_n(big.begin(), 5553, 1);
  CHECK(corpus::stratified_split(big, 0.2, 1).test_indices.size() == 2626);
  CHECK_THROWS_AS(corpus::stratified_split(std::vector<int>{1, 0, 0}, 0.5, 1), DataError);
}

TEST_CASE("clean_text") {
  CHECK(textprep::clean_text("Cek http://a.b @budi !!") == "cek");
  CHECK(textprep::clean_text("RT USER: Dasar BODOH") == "dasar bodoh");
  CHECK(textprep::clean_text("") == "");
  CHECK(textprep::clean_text("kamu\\nitu \\xf0\\x9f\\x98\\x82 URL") == "kamu itu");
}

TEST_CASE("tokenize, slang and stopwords") {
  CHECK(textprep::tokenize("dasar bodoh") == Tokens{"dasar", "bodoh"});
  CHECK(textprep::tokenize("").empty());
  CHECK(textprep::tokenize(" a  b ") == Tokens{"a", "b"});

  std::unordered_map<std::string, Tokens> slang = {{"gk", {"tidak"}}, {"km", {"kamu"}}};
  CHECK(textprep::normalize_slang({"gk", "mau"}, slang) == Tokens{"tidak", "mau"});
  CHECK(textprep::normalize_slang({"halo"}, slang) == Tokens{"halo"});
  CHECK(textprep::normalize_slang({"km", "km"}, slang) == Tokens{"kamu", "kamu"});
  slang["otw"] = {"on", "the", "way"};
  CHECK(textprep::normalize_slang({"otw", "x"}, slang) == Tokens{"on", "the", "way", "x"});

  CHECK(textprep::remove_stopwords({"orang", "yang", "bodoh"}, {"yang"}) == Tokens{"orang", "bodoh"});
  CHECK(textprep::remove_stopwords({"a", "b"}, {}) == Tokens{"a", "b"});
  CHECK(textprep::remove_stopwords({"yang", "yang"}, {"yang"}).empty());
}

TEST_CASE("preprocess equals the composed chain and is idempotent") {
  textprep::NormalizationResources r;
  r.slang_map = {{"gk", {"tidak"}}, {"yg", {"yang"}}};
  r.stopwords = {"yang", "di"};
  const std::vector<std::string> raw = {"RT USER: Gk suka yg di @sana http://x.y BODOH!!",
                                        "USER USER", "", "km   jalan\\n ke pasar"};
  for (const auto& s : raw) {
    const auto chained = textprep::remove_stopwords(
        textprep::normalize_slang(textprep::tokenize(textprep::clean_text(s)), r.slang_map), r.stopwords);
    CHECK(textprep::preprocess(s, r).tokens == chained);
  }
  CHECK(textprep::preprocess("USER USER", r).tokens.empty());

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    for (const auto& d : hbtest::random_docs(rng, 5, 12)) {
      std::string joined;
      for (const auto& t : d.tokens) joined += t + " ";
      const auto once = textprep::preprocess(joined, r);
      std::string again;
      for (const auto& t : once.tokens) again += t + " ";
      CHECK(textprep::preprocess(again, r) == once);
    }
  }
}

TEST_CASE("abusive_count") {
  std::unordered_set<std::string> lex = {"anjing", "bodoh"};
  CHECK(textprep::abusive_count(hbtest::doc({"anjing", "anjing", "bodoh", "x"}), lex) == 3);
  CHECK(textprep::abusive_count(hbtest::doc({"anjing"}), {}) == 0);
  CHECK(textprep::abusive_count(hbtest::doc({"x", "y"}), lex) == 0);
}

TEST_CASE("resource loaders") {
  hbtest::TempDir dir;
  const auto slang = dir.write("slang.csv", "gk,tidak\nOTW,on the way\n");
  const auto map = textprep::load_slang_map(slang);
  CHECK(map.at("gk") == Tokens{"tidak"});
  CHECK(map.at("otw") == Tokens{"on", "the", "way"});
  const auto stop = dir.write("stop.txt", "# comment\nyang\n\ndi\n");
  CHECK(textprep::load_token_set(stop) == std::unordered_set<std::string>{"yang", "di"});
}
