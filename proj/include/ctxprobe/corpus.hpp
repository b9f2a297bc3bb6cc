#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ctxprobe {

using TokenId = std::uint32_t;

enum class PosClass : std::uint8_t { noun, verb, adj, adv, closed, other };

inline constexpr PosClass kAllPosClasses[] = {PosClass::noun, PosClass::verb,   PosClass::adj,
                                              PosClass::adv,  PosClass::closed, PosClass::other};

std::string_view to_string(PosClass c);
PosClass pos_class_from_string(std::string_view name);

/// Open-class (content) words: noun, verb, adj, adv.
constexpr bool is_content(PosClass c) {
  return c == PosClass::noun || c == PosClass::verb || c == PosClass::adj || c == PosClass::adv;
}

/// Maps a Penn Treebank tag onto one of the six classes.
///
/// NN* -> noun, VB* -> verb, JJ* -> adj, RB* (and WRB) -> adv, punctuation,
/// symbol and number tags -> other, every remaining closed-class tag -> closed.
/// Tags outside the Penn set map to `other`; callers that care can pass a
/// counter to learn how many of those they saw.
PosClass classify_pos(std::string_view tag, std::size_t* unknown_counter = nullptr);

/// Dense token inventory. Ids are line numbers of the vocabulary file.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> entries);

  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Appends a single-character entry for every UTF-8 character of `text`
  /// that is not already present. Returns the number of entries added.
  std::size_t add_fallback_chars(std::string_view text);

  /// Adds `token` if absent; returns its id either way.
  TokenId add(std::string token);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::string& at(TokenId id) const { return entries_.at(id); }
  const std::vector<std::string>& entries() const { return entries_; }
  bool contains(std::string_view token) const;
  /// Throws std::out_of_range for unknown tokens.
  TokenId id(std::string_view token) const;
  std::size_t max_token_bytes() const { return max_bytes_; }

  /// FNV-1a over the entries in id order.
  std::string fingerprint() const;

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> entries_;
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> ids_;
  std::size_t max_bytes_ = 0;
};

/// One text, tokenized and aligned to its source words.
struct Document {
  std::string doc_id;
  std::vector<TokenId> tokens;
  std::vector<std::string> token_strings;
  std::vector<std::uint32_t> word_index;
  std::vector<std::uint32_t> within_word_pos;
  std::vector<PosClass> pos_class;
  /// Source words, plus whether each was preceded by whitespace in the input.
  std::vector<std::string> words;
  std::vector<bool> space_before;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool is_first_subword(std::size_t i) const { return within_word_pos[i] == 0; }
};

/// Splits text into words: maximal non-whitespace runs, with every ASCII
/// punctuation character split off as a word of its own.
std::vector<std::pair<std::string, bool>> split_words(std::string_view text);

/// Greedy longest-prefix match of a single word against `vocab`.
/// Throws ctxprobe::Error when some character has no vocabulary entry.
std::vector<TokenId> tokenize_word(std::string_view word, const Vocabulary& vocab);

Document tokenize(std::string_view raw_text, const Vocabulary& vocab, std::string doc_id = {});

/// Inverse of tokenize up to whitespace normalization: runs of whitespace
/// collapse to one space, leading and trailing whitespace is dropped.
std::string detokenize(const Document& doc);
std::string normalize_whitespace(std::string_view text);

struct TaggedWord {
  std::string word;
  std::string tag;
};

/// Sets every token's class from the tag of its source word.
/// Throws AlignmentError naming the first mismatched word index.
void attach_pos_tags(Document& doc, std::span<const TaggedWord> tags,
                     std::size_t* unknown_counter = nullptr);

/// Reads a `word<TAB>tag` stream; blank lines separate documents.
std::vector<std::vector<TaggedWord>> read_tag_file(const std::filesystem::path& path);

/// Lower-fidelity tagger for untagged corpora: a closed-class word list plus
/// suffix heuristics (-ly adverb, -ous/-ful/-ive adjective, otherwise noun).
/// Emits Penn tags so its output flows through classify_pos like real tags.
std::string fallback_tag(std::string_view word);
void attach_fallback_tags(Document& doc);

/// A document read from disk: id is the file stem.
struct SourceText {
  std::string doc_id;
  std::string text;
};

/// Expands files and directories (every regular file inside, sorted by name).
std::vector<std::filesystem::path> expand_paths(std::span<const std::filesystem::path> paths);
std::vector<SourceText> read_sources(std::span<const std::filesystem::path> paths);

}  // namespace ctxprobe
