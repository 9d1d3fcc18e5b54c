#include "hatebench/textprep.hpp"

#include <cctype>

#include "hatebench/error.hpp"
#include "hatebench/table.hpp"

namespace hatebench::textprep {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_alnum(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }

bool is_hex(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }

bool starts_with(std::string_view s, std::size_t i, std::string_view prefix) {
  return s.substr(i, prefix.size()) == prefix;
}

bool is_placeholder(std::string_view token) {
  return token == "user" || token == "url" || token == "rt";
}

}  // namespace

std::string clean_text(std::string_view raw) {
  std::string lower(raw);
  for (auto& c : lower)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');

  // Drop URLs, mentions and escape sequences, map everything else that is
  // not [a-z0-9] to a space.
  std::string spaced;
  spaced.reserve(lower.size());
  std::size_t i = 0;
  const std::string_view s = lower;
  while (i < s.size()) {
    const bool word_start = i == 0 || is_space(s[i - 1]);
    if (starts_with(s, i, "http://") || starts_with(s, i, "https://") ||
        (word_start && starts_with(s, i, "www."))) {
      while (i < s.size() && !is_space(s[i])) ++i;
      spaced.push_back(' ');
      continue;
    }
    if (s[i] == '@') {
      ++i;
      while (i < s.size() && (is_alnum(s[i]) || s[i] == '_')) ++i;
      spaced.push_back(' ');
      continue;
    }
    if (s[i] == '\\' && i + 1 < s.size()) {
      if (s[i + 1] == 'n' || s[i + 1] == 't' || s[i + 1] == 'r') {
        i += 2;
        spaced.push_back(' ');
        continue;
      }
      if (s[i + 1] == 'x' && i + 3 < s.size() && is_hex(s[i + 2]) && is_hex(s[i + 3])) {
        i += 4;
        spaced.push_back(' ');
        continue;
      }
    }
    spaced.push_back(is_alnum(s[i]) ? s[i] : ' ');
    ++i;
  }

  std::string out;
  out.reserve(spaced.size());
  for (const auto& token : tokenize(spaced)) {
    if (is_placeholder(token)) continue;
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

Tokens tokenize(std::string_view cleaned) {
  Tokens tokens;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && is_space(cleaned[i])) ++i;
    const std::size_t start = i;
    while (i < cleaned.size() && !is_space(cleaned[i])) ++i;
    if (i > start) tokens.emplace_back(cleaned.substr(start, i - start));
  }
  return tokens;
}

Tokens normalize_slang(const Tokens& tokens,
                       const std::unordered_map<std::string, Tokens>& slang_map) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    const auto it = slang_map.find(t);
    if (it == slang_map.end()) {
      out.push_back(t);
    } else {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

Tokens remove_stopwords(const Tokens& tokens, const std::unordered_set<std::string>& stopwords) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!stopwords.contains(t)) out.push_back(t);
  return out;
}

CleanDoc preprocess(std::string_view raw, const NormalizationResources& r) {
  return {remove_stopwords(normalize_slang(tokenize(clean_text(raw)), r.slang_map), r.stopwords)};
}

std::vector<CleanDoc> preprocess_all(std::span<const std::string> raw,
                                     const NormalizationResources& r) {
  std::vector<CleanDoc> docs;
  docs.reserve(raw.size());
  for (const auto& text : raw) docs.push_back(preprocess(text, r));
  return docs;
}

std::size_t abusive_count(const CleanDoc& doc, const std::unordered_set<std::string>& lexicon) {
  std::size_t n = 0;
  for (const auto& t : doc.tokens)
    if (lexicon.contains(t)) ++n;
  return n;
}

std::unordered_map<std::string, Tokens> load_slang_map(const std::string& path) {
  const DelimitedTable table = read_delimited_file(path);
  std::unordered_map<std::string, Tokens> map;
  auto add = [&](const std::vector<std::string>& row) {
    if (row.size() < 2) return;
    // Keys and values go through the same cleaning as tweet text so the
    // mapping can never reintroduce symbols or uppercase.
    const std::string key = clean_text(row[0]);
    Tokens value = tokenize(clean_text(row[1]));
    if (key.empty() || key.find(' ') != std::string::npos) return;
    map.try_emplace(key, std::move(value));
  };
  add(table.header);
  for (const auto& row : table.rows) add(row);
  return map;
}

std::unordered_set<std::string> load_token_set(const std::string& path) {
  const std::string text = sanitize_utf8(read_text_file(path));
  std::unordered_set<std::string> set;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    if (!line.empty() && line.front() != '#') {
      for (auto& t : tokenize(clean_text(line))) set.insert(std::move(t));
    }
    start = end + 1;
  }
  return set;
}

NormalizationResources load_resources(const std::string& slang_path,
                                      const std::string& stopwords_path,
                                      const std::string& lexicon_path) {
  NormalizationResources r;
  if (!slang_path.empty()) r.slang_map = load_slang_map(slang_path);
  if (!stopwords_path.empty()) r.stopwords = load_token_set(stopwords_path);
  if (!lexicon_path.empty()) r.abusive_lexicon = load_token_set(lexicon_path);
  return r;
}

}  // namespace hatebench::textprep
