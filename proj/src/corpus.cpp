#include "ctxprobe/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ctxprobe/error.hpp"
#include "ctxprobe/hash.hpp"

namespace ctxprobe {
namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

std::size_t utf8_char_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;  // stray continuation byte; treat as its own unit
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> entries) {
  for (auto& e : entries) {
    if (e.empty()) throw Error("vocabulary entries must be non-empty");
    if (contains(e)) throw Error("duplicate vocabulary entry: " + e);
    add(std::move(e));
  }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read vocabulary file " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    entries.push_back(line);
  }
  return Vocabulary(std::move(entries));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write vocabulary file " + path.string());
  for (const auto& e : entries_) out << e << '\n';
}

TokenId Vocabulary::add(std::string token) {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  auto id = static_cast<TokenId>(entries_.size());
  max_bytes_ = std::max(max_bytes_, token.size());
  ids_.emplace(token, id);
  entries_.push_back(std::move(token));
  return id;
}

std::size_t Vocabulary::add_fallback_chars(std::string_view text) {
  std::size_t added = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    auto len = std::min(utf8_char_len(static_cast<unsigned char>(text[pos])), text.size() - pos);
    if (!is_space(static_cast<unsigned char>(text[pos]))) {
      std::string_view ch = text.substr(pos, len);
      if (!contains(ch)) {
        add(std::string(ch));
        ++added;
      }
    }
    pos += len;
  }
  return added;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) throw std::out_of_range("token not in vocabulary: " + std::string(token));
  return it->second;
}

std::string Vocabulary::fingerprint() const {
  Fnv1a h;
  h.update_u64(entries_.size());
  for (const auto& e : entries_) h.update(e).update(std::string_view("\n", 1));
  return h.hex();
}

std::vector<std::pair<std::string, bool>> split_words(std::string_view text) {
  std::vector<std::pair<std::string, bool>> words;
  bool space = false;
  std::string current;
  bool current_space = false;
  auto flush = [&] {
    if (!current.empty()) {
      words.emplace_back(std::move(current), current_space);
      current.clear();
      space = false;
    }
  };
  for (std::size_t pos = 0; pos < text.size();) {
    auto c = static_cast<unsigned char>(text[pos]);
    if (is_space(c)) {
      flush();
      space = !words.empty();
      ++pos;
      continue;
    }
    if (is_ascii_punct(c)) {
      flush();
      words.emplace_back(std::string(1, static_cast<char>(c)), space);
      space = false;
      ++pos;
      continue;
    }
    if (current.empty()) current_space = space;
    auto len = std::min(utf8_char_len(c), text.size() - pos);
    current.append(text.substr(pos, len));
    pos += len;
  }
  flush();
  return words;
}

std::vector<TokenId> tokenize_word(std::string_view word, const Vocabulary& vocab) {
  std::vector<TokenId> out;
  std::size_t pos = 0;
  while (pos < word.size()) {
    std::size_t len = std::min(vocab.max_token_bytes(), word.size() - pos);
    bool matched = false;
    for (; len > 0; --len) {
      std::string_view piece = word.substr(pos, len);
      if (vocab.contains(piece)) {
        out.push_back(vocab.id(piece));
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      auto clen = std::min(utf8_char_len(static_cast<unsigned char>(word[pos])), word.size() - pos);
      throw Error("no vocabulary entry covers character '" + std::string(word.substr(pos, clen)) +
                  "' in word '" + std::string(word) + "'");
    }
  }
  return out;
}

Document tokenize(std::string_view raw_text, const Vocabulary& vocab, std::string doc_id) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  auto words = split_words(raw_text);
  for (std::uint32_t w = 0; w < words.size(); ++w) {
    auto ids = tokenize_word(words[w].first, vocab);
    for (std::uint32_t k = 0; k < ids.size(); ++k) {
      doc.tokens.push_back(ids[k]);
      doc.token_strings.push_back(vocab.at(ids[k]));
      doc.word_index.push_back(w);
      doc.within_word_pos.push_back(k);
      doc.pos_class.push_back(PosClass::other);
    }
    doc.words.push_back(std::move(words[w].first));
    doc.space_before.push_back(words[w].second);
  }
  return doc;
}

std::string detokenize(const Document& doc) {
  std::vector<std::string> words(doc.words.size());
  for (std::size_t i = 0; i < doc.size(); ++i) words[doc.word_index[i]] += doc.token_strings[i];
  std::string out;
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (doc.space_before[w]) out += ' ';
    out += words[w];
  }
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool pending = false;
  for (char c : text) {
    if (is_space(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

void attach_pos_tags(Document& doc, std::span<const TaggedWord> tags, std::size_t* unknown_counter) {
  const std::size_t n = std::min(tags.size(), doc.words.size());
  for (std::size_t w = 0; w < n; ++w) {
    if (tags[w].word != doc.words[w])
      throw AlignmentError(w, "document has '" + doc.words[w] + "', tag file has '" + tags[w].word + "'");
  }
  if (tags.size() != doc.words.size())
    throw AlignmentError(n, "document has " + std::to_string(doc.words.size()) + " words, tag file has " +
                                std::to_string(tags.size()));
  std::vector<PosClass> word_class(tags.size());
  for (std::size_t w = 0; w < tags.size(); ++w) word_class[w] = classify_pos(tags[w].tag, unknown_counter);
  for (std::size_t i = 0; i < doc.size(); ++i) doc.pos_class[i] = word_class[doc.word_index[i]];
}

std::vector<std::vector<TaggedWord>> read_tag_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read tag file " + path.string());
  std::vector<std::vector<TaggedWord>> docs(1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!docs.back().empty()) docs.emplace_back();
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>tag");
    docs.back().push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  if (docs.back().empty()) docs.pop_back();
  return docs;
}

std::vector<std::filesystem::path> expand_paths(std::span<const std::filesystem::path> paths) {
  namespace fs = std::filesystem;
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> inner;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file()) inner.push_back(e.path());
      std::sort(inner.begin(), inner.end());
      out.insert(out.end(), inner.begin(), inner.end());
    } else if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw Error("cannot read corpus path " + p.string());
    }
  }
  return out;
}

std::vector<SourceText> read_sources(std::span<const std::filesystem::path> paths) {
  std::vector<SourceText> out;
  for (const auto& p : expand_paths(paths)) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read corpus file " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    out.push_back({p.stem().string(), ss.str()});
  }
  return out;
}

}  // namespace ctxprobe
