#include "hatebench/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hatebench/error.hpp"
#include "hatebench/rng.hpp"
#include "hatebench/svg.hpp"
#include "hatebench/table.hpp"

namespace hatebench::corpus {

Task parse_task(const std::string& name) {
  if (name == "hs") return Task::HateSpeech;
  if (name == "abusive") return Task::Abusive;
  throw ConfigError("unknown task '" + name + "' (expected hs or abusive)");
}

const char* task_name(Task task) { return task == Task::HateSpeech ? "hs" : "abusive"; }

std::vector<int> labels(std::span<const LabeledTweet> corpus, Task task) {
  std::vector<int> y;
  y.reserve(corpus.size());
  for (const auto& t : corpus) y.push_back(task == Task::HateSpeech ? t.hs : t.abusive);
  return y;
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (trim(header[i]) == name) return i;
  throw DataError(path + ": missing column '" + name + "' in header");
}

int parse_label(const std::string& cell, const std::string& column, std::size_t line,
                const std::string& path) {
  const std::string v = trim(cell);
  if (v == "0") return 0;
  if (v == "1") return 1;
  throw DataError(path + ": row at line " + std::to_string(line) + " has non-binary " + column +
                  " label '" + v + "'");
}

}  // namespace

std::vector<LabeledTweet> load_corpus(const std::string& path, const ColumnMap& columns) {
  if (!std::filesystem::exists(path)) throw DataError("dataset not found: " + path);
  const DelimitedTable table = read_delimited_file(path);
  if (table.header.empty()) throw DataError(path + ": empty file");
  const auto text_col = find_column(table.header, columns.text, path);
  const auto hs_col = find_column(table.header, columns.hs, path);
  const auto ab_col = find_column(table.header, columns.abusive, path);
  const auto needed = std::max({text_col, hs_col, ab_col});

  std::vector<LabeledTweet> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.line_numbers[r];
    if (row.size() <= needed)
      throw DataError(path + ": row at line " + std::to_string(line) + " has " +
                      std::to_string(row.size()) + " fields, expected at least " +
                      std::to_string(needed + 1));
    out.push_back({row[text_col], parse_label(row[hs_col], columns.hs, line, path),
                   parse_label(row[ab_col], columns.abusive, line, path)});
  }
  return out;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

CorpusStats corpus_stats(std::span<const LabeledTweet> corpus) {
  if (corpus.empty()) throw DataError("corpus_stats: empty corpus");
  CorpusStats s;
  s.total_rows = corpus.size();
  std::size_t total_words = 0;
  for (const auto& t : corpus) {
    (t.hs ? s.hs_counts.second : s.hs_counts.first)++;
    (t.abusive ? s.abusive_counts.second : s.abusive_counts.first)++;
    const auto n = word_count(t.text);
    s.length_histogram[n]++;
    total_words += n;
  }
  s.mean_length = static_cast<double>(total_words) / static_cast<double>(s.total_rows);
  return s;
}

DataSplit stratified_split(std::span<const int> y, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("test fraction must lie in (0, 1)");
  DataSplit split;
  split.seed = seed;
  split.test_fraction = test_fraction;
  Rng rng(seed);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) members.push_back(i);
    if (members.size() < 2)
      throw DataError("stratified_split: class " + std::to_string(cls) + " has " +
                      std::to_string(members.size()) + " member(s); need at least 2");
    auto n_test = static_cast<std::size_t>(
        std::llround(static_cast<double>(members.size()) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    std::shuffle(members.begin(), members.end(), rng);
    split.test_indices.insert(split.test_indices.end(), members.begin(),
                              members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train_indices.insert(split.train_indices.end(),
                               members.begin() + static_cast<std::ptrdiff_t>(n_test),
                               members.end());
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  return split;
}

std::string stats_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["total_rows"] = s.total_rows;
  j["hs_counts"] = {{"negative", s.hs_counts.first}, {"positive", s.hs_counts.second}};
  j["abusive_counts"] = {{"negative", s.abusive_counts.first},
                         {"positive", s.abusive_counts.second}};
  j["mean_length"] = s.mean_length;
  auto hist = nlohmann::ordered_json::array();
  for (const auto& [words, count] : s.length_histogram) hist.push_back({words, count});
  j["length_histogram"] = hist;
  return j.dump(2) + "\n";
}

void write_eda(const CorpusStats& s, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_text_file((dir / "stats.json").string(), stats_json(s));

  std::ostringstream csv;
  csv << "words,count\n";
  for (const auto& [words, count] : s.length_histogram) csv << words << ',' << count << '\n';
  write_text_file((dir / "length_hist.csv").string(), csv.str());

  svg::Document doc(960, 320);
  svg::bar_panel(doc, 0, 0, 240, 320, "HS label",
                 {"non-HS (0)", "HS (1)"},
                 {static_cast<double>(s.hs_counts.first), static_cast<double>(s.hs_counts.second)},
                 {"#4c72b0", "#c44e52"});
  svg::bar_panel(doc, 240, 0, 240, 320, "Abusive label",
                 {"non-abusive (0)", "abusive (1)"},
                 {static_cast<double>(s.abusive_counts.first),
                  static_cast<double>(s.abusive_counts.second)},
                 {"#4c72b0", "#dd8452"});
  std::vector<std::string> labels;
  std::vector<double> counts;
  const std::size_t max_len = s.length_histogram.empty() ? 0 : s.length_histogram.rbegin()->first;
  for (std::size_t w = 0; w <= max_len; ++w) {
    labels.push_back(std::to_string(w));
    const auto it = s.length_histogram.find(w);
    counts.push_back(it == s.length_histogram.end() ? 0.0 : static_cast<double>(it->second));
  }
  svg::bar_panel(doc, 480, 0, 480, 300,
                 "Tweet length (words), mean " + svg::num(s.mean_length, 1), labels, counts,
                 {"#55a868"});
  write_text_file((dir / "eda.svg").string(), doc.str());
}

}  // namespace hatebench::corpus
