#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ctxprobe/corpus.hpp"

namespace testing {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("ctxprobe-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Document with the given token ids and one word per token; enough for
// components that only read `tokens`.
inline ctxprobe::Document raw_document(std::vector<ctxprobe::TokenId> tokens, std::string id = "d") {
  ctxprobe::Document doc;
  doc.doc_id = std::move(id);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    doc.token_strings.push_back("t" + std::to_string(tokens[i]));
    doc.word_index.push_back(static_cast<std::uint32_t>(i));
    doc.within_word_pos.push_back(0);
    doc.pos_class.push_back(ctxprobe::PosClass::other);
    doc.words.push_back(doc.token_strings.back());
    doc.space_before.push_back(i > 0);
  }
  doc.tokens = std::move(tokens);
  return doc;
}

inline std::vector<ctxprobe::TokenId> random_tokens(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
  std::vector<ctxprobe::TokenId> out(n);
  for (auto& t : out) t = static_cast<ctxprobe::TokenId>(rng() % vocab);
  return out;
}

}  // namespace testing
