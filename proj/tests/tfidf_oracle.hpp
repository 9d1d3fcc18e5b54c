#pragma once

// Straight transcription of the weighting formulas, independent of the
// library's hash maps and sorting.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "hatebench/features.hpp"

namespace hbtest {

inline std::vector<std::string> oracle_grams(const hatebench::textprep::CleanDoc& d, int lo, int hi) {
  std::vector<std::string> out;
  for (int n = lo; n <= hi; ++n)
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= d.tokens.size(); ++i) {
      std::string g;
      for (int k = 0; k < n; ++k) g += (k ? "_" : "") + d.tokens[i + static_cast<std::size_t>(k)];
      out.push_back(g);
    }
  return out;
}

inline std::size_t oracle_df(const std::string& term, const std::vector<hatebench::textprep::CleanDoc>& docs,
                             std::pair<int, int> range) {
  std::size_t df = 0;
  for (const auto& d : docs) {
    const auto g = oracle_grams(d, range.first, range.second);
    if (std::find(g.begin(), g.end(), term) != g.end()) ++df;
  }
  return df;
}

inline std::vector<std::string> oracle_vocabulary(const std::vector<hatebench::textprep::CleanDoc>& docs,
                                                  std::size_t cap, std::pair<int, int> range) {
  std::vector<std::string> all;
  for (const auto& d : docs)
    for (auto& g : oracle_grams(d, range.first, range.second))
      if (std::find(all.begin(), all.end(), g) == all.end()) all.push_back(g);
  std::vector<std::pair<long, std::string>> ranked;
  for (auto& t : all) ranked.emplace_back(-static_cast<long>(oracle_df(t, docs, range)), t);
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < ranked.size() && i < cap; ++i) kept.push_back(ranked[i].second);
  std::sort(kept.begin(), kept.end());
  return kept;
}

inline std::vector<double> oracle_tfidf(const hatebench::textprep::CleanDoc& d,
                                        const std::vector<hatebench::textprep::CleanDoc>& docs,
                                        const std::vector<std::string>& terms, std::pair<int, int> range) {
  const auto grams = oracle_grams(d, range.first, range.second);
  std::vector<double> out;
  for (const auto& t : terms) {
    const double tf = static_cast<double>(std::count(grams.begin(), grams.end(), t));
    const double n = static_cast<double>(docs.size());
    const double idf = std::max(0.0, std::log(n / (static_cast<double>(oracle_df(t, docs, range)) + 1.0)));
    out.push_back(tf * idf);
  }
  return out;
}

}  // namespace hbtest
