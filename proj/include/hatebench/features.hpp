#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hatebench/textprep.hpp"

namespace hatebench::features {

struct SparseEntry {
  std::uint32_t column;
  double value;
  bool operator==(const SparseEntry&) const = default;
};

/// Compressed sparse rows. Column indices are strictly increasing per row.
struct SparseMatrix {
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<SparseEntry> entries;

  std::size_t n_rows() const { return row_ptr.size() - 1; }
  std::span<const SparseEntry> row(std::size_t r) const {
    return {entries.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
  }
  void append_row(std::span<const SparseEntry> row);
  /// Copies the given rows in order.
  SparseMatrix select_rows(std::span<const std::size_t> rows) const;
  static SparseMatrix from_dense(const std::vector<std::vector<double>>& dense);
};

struct NgramRange {
  int min_n = 1;
  int max_n = 2;
};

/// Fitted TF-IDF vocabulary. Columns are assigned in lexicographic order of
/// the retained terms; bigrams are joined with '_'.
struct Vocabulary {
  std::map<std::string, std::uint32_t> index;
  std::vector<std::string> terms;   // column -> term
  std::vector<std::size_t> df;      // column -> document frequency
  std::size_t n_docs = 0;
  std::size_t max_terms = 5000;
  NgramRange ngrams;

  std::size_t size() const { return terms.size(); }
};

/// Distinct-or-not n-grams of the doc, in order of appearance.
std::vector<std::string> extract_ngrams(const textprep::Tokens& tokens, NgramRange range);

/// Retains the max_terms candidates with highest document frequency,
/// ties broken lexicographically ascending.
Vocabulary fit_vocabulary(std::span<const textprep::CleanDoc> docs, std::size_t max_terms = 5000,
                          NgramRange range = {});

/// max(0, ln(N / (df + 1))); the clamp keeps inputs non-negative for
/// multinomial Naive Bayes.
double idf(std::size_t n_docs, std::size_t df);

/// z = [tf-idf block ; abusive count], dimensionality |terms| + 1.
struct FeatureVector {
  std::vector<SparseEntry> tfidf;  // strictly increasing columns < |terms|
  double abusive_slot = 0.0;
  std::size_t dim = 0;

  /// Dense copy, mainly for tests.
  std::vector<double> dense() const;
};

FeatureVector tfidf_vector(const textprep::CleanDoc& doc, const Vocabulary& vocab);

FeatureVector assemble_features(const textprep::CleanDoc& doc, const Vocabulary& vocab,
                                const std::unordered_set<std::string>& lexicon);

std::vector<FeatureVector> transform_corpus(std::span<const textprep::CleanDoc> docs,
                                            const Vocabulary& vocab,
                                            const std::unordered_set<std::string>& lexicon);

/// Row-stacks feature vectors; the abusive slot lands in the last column and
/// is stored only when non-zero.
SparseMatrix to_matrix(std::span<const FeatureVector> rows);

/// Text format: "# n_docs=<N> max_terms=<cap> ngram_min=<a> ngram_max=<b>"
/// then one "term<TAB>df" line per column.
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

}  // namespace hatebench::features
