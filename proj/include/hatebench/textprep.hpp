#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hatebench::textprep {

using Tokens = std::vector<std::string>;

/// Shared token sequence feeding both the sparse and the neural branch.
/// Tokens are lowercase [a-z0-9]+ and never empty.
struct CleanDoc {
  Tokens tokens;
  bool operator==(const CleanDoc&) const = default;
};

struct NormalizationResources {
  std::unordered_map<std::string, Tokens> slang_map;  // surface -> canonical tokens
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> abusive_lexicon;
};

/// Lowercases, removes URLs, @-mentions, literal "\n"/"\xNN" escapes, the
/// anonymisation placeholders (user, url) and the retweet marker (rt), maps
/// every other non-alphanumeric byte to a space and collapses whitespace.
std::string clean_text(std::string_view raw);

Tokens tokenize(std::string_view cleaned);

Tokens normalize_slang(const Tokens& tokens,
                       const std::unordered_map<std::string, Tokens>& slang_map);

Tokens remove_stopwords(const Tokens& tokens, const std::unordered_set<std::string>& stopwords);

CleanDoc preprocess(std::string_view raw, const NormalizationResources& resources);

std::vector<CleanDoc> preprocess_all(std::span<const std::string> raw,
                                     const NormalizationResources& resources);

/// Counts token positions found in the lexicon; repeats count every time.
std::size_t abusive_count(const CleanDoc& doc, const std::unordered_set<std::string>& lexicon);

/// Two-column delimited file (surface,canonical). A header row whose first
/// cell is not a lexicon entry is fine; it simply maps one odd token.
std::unordered_map<std::string, Tokens> load_slang_map(const std::string& path);

/// One token per line; blank lines and '#' comments are skipped.
std::unordered_set<std::string> load_token_set(const std::string& path);

NormalizationResources load_resources(const std::string& slang_path,
                                      const std::string& stopwords_path,
                                      const std::string& lexicon_path);

}  // namespace hatebench::textprep
