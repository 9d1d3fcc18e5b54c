#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hatebench::corpus {

/// One row of the annotation table.
struct LabeledTweet {
  std::string text;
  int hs = 0;
  int abusive = 0;
};

enum class Task { HateSpeech, Abusive };

Task parse_task(const std::string& name);
const char* task_name(Task task);

/// Binary target of `task` for every row.
std::vector<int> labels(std::span<const LabeledTweet> corpus, Task task);

struct ColumnMap {
  std::string text = "Tweet";
  std::string hs = "HS";
  std::string abusive = "Abusive";
};

/// (negatives, positives)
using ClassCounts = std::pair<std::size_t, std::size_t>;

struct CorpusStats {
  std::size_t total_rows = 0;
  ClassCounts hs_counts;
  ClassCounts abusive_counts;
  std::map<std::size_t, std::size_t> length_histogram;  // word count -> frequency
  double mean_length = 0.0;
};

struct DataSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
};

/// Loads the delimited annotation table. Label cells must be exactly 0 or 1;
/// anything else is a DataError naming the source line.
std::vector<LabeledTweet> load_corpus(const std::string& path, const ColumnMap& columns = {});

/// Number of whitespace-delimited tokens.
std::size_t word_count(std::string_view text);

CorpusStats corpus_stats(std::span<const LabeledTweet> corpus);

/// Per-class sampling without replacement: each class contributes
/// round(count * test_fraction) rows to the test side, clamped so both
/// sides keep at least one member. Index lists come back sorted.
DataSplit stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed);

/// Writes stats.json, length_hist.csv and eda.svg into `out_dir`.
void write_eda(const CorpusStats& stats, const std::string& out_dir);

std::string stats_json(const CorpusStats& stats);

template <typename T>
std::vector<T> gather(std::span<const T> items, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(items[i]);
  return out;
}

}  // namespace hatebench::corpus
