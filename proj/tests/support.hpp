#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hatebench/table.hpp"
#include "hatebench/textprep.hpp"

namespace hbtest {

/// Directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> serial{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hatebench-test-" + std::to_string(::getpid()) + "-" + std::to_string(serial++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    hatebench::write_text_file(file(name), content);
    return file(name);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline hatebench::textprep::CleanDoc doc(std::vector<std::string> tokens) { return {std::move(tokens)}; }

/// Random corpus over a tiny alphabet so n-grams repeat.
inline std::vector<hatebench::textprep::CleanDoc> random_docs(std::mt19937_64& rng, std::size_t max_docs,
                                                              std::size_t max_tokens) {
  static const char* words[] = {"a", "b", "c", "d", "e", "f", "g"};
  std::uniform_int_distribution<std::size_t> n_docs(1, max_docs), n_tok(0, max_tokens), w(0, 6);
  std::vector<hatebench::textprep::CleanDoc> out(n_docs(rng));
  for (auto& d : out) {
    const auto n = n_tok(rng);
    for (std::size_t i = 0; i < n; ++i) d.tokens.emplace_back(words[w(rng)]);
  }
  return out;
}

}  // namespace hbtest
