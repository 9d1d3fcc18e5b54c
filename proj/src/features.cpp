#include "hatebench/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hatebench/error.hpp"
#include "hatebench/table.hpp"

namespace hatebench::features {

void SparseMatrix::append_row(std::span<const SparseEntry> row) {
  entries.insert(entries.end(), row.begin(), row.end());
  row_ptr.push_back(entries.size());
}

SparseMatrix SparseMatrix::select_rows(std::span<const std::size_t> rows) const {
  SparseMatrix out;
  out.n_cols = n_cols;
  for (auto r : rows) out.append_row(row(r));
  return out;
}

SparseMatrix SparseMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
  SparseMatrix m;
  for (const auto& r : dense) {
    m.n_cols = std::max(m.n_cols, r.size());
    std::vector<SparseEntry> row;
    for (std::size_t j = 0; j < r.size(); ++j)
      if (r[j] != 0.0) row.push_back({static_cast<std::uint32_t>(j), r[j]});
    m.append_row(row);
  }
  return m;
}

std::vector<std::string> extract_ngrams(const textprep::Tokens& tokens, NgramRange range) {
  std::vector<std::string> grams;
  for (int n = range.min_n; n <= range.max_n; ++n) {
    const auto un = static_cast<std::size_t>(n);
    if (tokens.size() < un) break;
    for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t k = 1; k < un; ++k) {
        g.push_back('_');
        g += tokens[i + k];
      }
      grams.push_back(std::move(g));
    }
  }
  return grams;
}

Vocabulary fit_vocabulary(std::span<const textprep::CleanDoc> docs, std::size_t max_terms,
                          NgramRange range) {
  if (docs.empty()) throw DataError("fit_vocabulary: empty document list");
  if (range.min_n < 1 || range.max_n < range.min_n) throw ConfigError("invalid n-gram range");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    auto grams = extract_ngrams(doc.tokens, range);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[std::move(g)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_terms) ranked.resize(max_terms);
  std::sort(ranked.begin(), ranked.end());

  Vocabulary v;
  v.n_docs = docs.size();
  v.max_terms = max_terms;
  v.ngrams = range;
  for (auto& [term, count] : ranked) {
    v.index.emplace(term, static_cast<std::uint32_t>(v.terms.size()));
    v.terms.push_back(term);
    v.df.push_back(count);
  }
  return v;
}

double idf(std::size_t n_docs, std::size_t df) {
  return std::max(0.0, std::log(static_cast<double>(n_docs) / static_cast<double>(df + 1)));
}

std::vector<double> FeatureVector::dense() const {
  std::vector<double> out(dim, 0.0);
  for (const auto& e : tfidf) out[e.column] = e.value;
  if (dim > 0) out[dim - 1] = abusive_slot;
  return out;
}

FeatureVector tfidf_vector(const textprep::CleanDoc& doc, const Vocabulary& vocab) {
  std::map<std::uint32_t, std::size_t> tf;
  for (const auto& g : extract_ngrams(doc.tokens, vocab.ngrams)) {
    const auto it = vocab.index.find(g);
    if (it != vocab.index.end()) ++tf[it->second];
  }
  FeatureVector fv;
  fv.dim = vocab.size() + 1;
  fv.tfidf.reserve(tf.size());
  for (const auto& [col, count] : tf)
    fv.tfidf.push_back({col, static_cast<double>(count) * idf(vocab.n_docs, vocab.df[col])});
  return fv;
}

FeatureVector assemble_features(const textprep::CleanDoc& doc, const Vocabulary& vocab,
                                const std::unordered_set<std::string>& lexicon) {
  FeatureVector fv = tfidf_vector(doc, vocab);
  fv.abusive_slot = static_cast<double>(textprep::abusive_count(doc, lexicon));
  return fv;
}

std::vector<FeatureVector> transform_corpus(std::span<const textprep::CleanDoc> docs,
                                            const Vocabulary& vocab,
                                            const std::unordered_set<std::string>& lexicon) {
  std::vector<FeatureVector> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(assemble_features(d, vocab, lexicon));
  return rows;
}

SparseMatrix to_matrix(std::span<const FeatureVector> rows) {
  SparseMatrix m;
  std::vector<SparseEntry> buf;
  for (const auto& fv : rows) {
    if (m.n_cols == 0) m.n_cols = fv.dim;
    if (fv.dim != m.n_cols) throw DataError("to_matrix: inconsistent feature dimensionality");
    buf.assign(fv.tfidf.begin(), fv.tfidf.end());
    if (fv.abusive_slot != 0.0)
      buf.push_back({static_cast<std::uint32_t>(fv.dim - 1), fv.abusive_slot});
    m.append_row(buf);
  }
  return m;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ostringstream out;
  out << "# n_docs=" << vocab.n_docs << " max_terms=" << vocab.max_terms
      << " ngram_min=" << vocab.ngrams.min_n << " ngram_max=" << vocab.ngrams.max_n << '\n';
  for (std::size_t i = 0; i < vocab.size(); ++i) out << vocab.terms[i] << '\t' << vocab.df[i] << '\n';
  write_text_file(path, out.str());
}

Vocabulary load_vocabulary(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  Vocabulary v;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# n_docs=%zu max_terms=%zu ngram_min=%d ngram_max=%d",
                  &v.n_docs, &v.max_terms, &v.ngrams.min_n, &v.ngrams.max_n) != 4)
    throw DataError(path + ": malformed vocabulary header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path + ": malformed vocabulary line: " + line);
    const std::string term = line.substr(0, tab);
    v.index.emplace(term, static_cast<std::uint32_t>(v.terms.size()));
    v.terms.push_back(term);
    v.df.push_back(std::stoull(line.substr(tab + 1)));
  }
  return v;
}

}  // namespace hatebench::features
