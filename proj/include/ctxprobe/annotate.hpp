#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "ctxprobe/corpus.hpp"
#include "ctxprobe/pairs.hpp"

namespace ctxprobe {

/// Occurrences of g_i = tokens[i-N+1 .. i] in token i's two context windows.
///
/// Original window: the K tokens [i-K, i-1]. New window: the K tokens before
/// it, [i-2K, i-K-1], clipped at the document start (only i = 2K-1 is
/// affected, losing one position). An occurrence counts when it lies wholly
/// inside a window; overlapping occurrences count separately and occurrences
/// straddling the window boundary count in neither.
struct NGramStats {
  std::size_t token_index = 0;
  std::size_t n = 0;
  std::uint64_t count_original = 0;
  std::uint64_t count_new = 0;
  /// (count_new + 1) / (count_original + 1)
  double ratio = 1.0;
};

double new_occurrence_ratio(std::uint64_t count_new, std::uint64_t count_original);

/// Direct scan of both windows. Throws Error when i < 2K-1, N < 1, N > K or N > i+1.
NGramStats ngram_stats(const Document& doc, std::size_t i, std::size_t n, std::size_t k);

/// Same result as ngram_stats for every i in [2K-1, |doc|), computed with
/// sliding window counts over interned N-gram ids.
std::vector<NGramStats> ngram_stats_all(const Document& doc, std::size_t n, std::size_t k);

struct SubwordPartition {
  std::vector<std::size_t> first;
  std::vector<std::size_t> latter;
};

SubwordPartition subword_partition(const Document& doc);

/// Raw token counts over a reference corpus.
class FrequencyTable {
 public:
  void add(TokenId id, std::uint64_t count = 1);
  /// Absent ids count zero.
  std::uint64_t count(TokenId id) const;
  std::uint64_t total() const { return total_; }
  void merge(const FrequencyTable& other);
  const std::unordered_map<TokenId, std::uint64_t>& counts() const { return counts_; }

  /// `#total<TAB>N` header, then `token_id<TAB>count` rows sorted by id.
  void save(const std::filesystem::path& path) const;
  static FrequencyTable load(const std::filesystem::path& path);

  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;

 private:
  std::unordered_map<TokenId, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Streams every file line by line through the tokenizer; memory does not
/// grow with corpus size. Files are counted on up to `workers` threads and
/// merged additively.
FrequencyTable build_frequency_table(std::span<const std::filesystem::path> corpus_paths, const Vocabulary& vocab,
                                     std::size_t workers = 1);

/// Fills the N-gram fields of pairs drawn from `doc` at tier `k`.
void annotate_ngrams(std::span<PairedComparison> pairs, const Document& doc, std::size_t n);
void annotate_frequency(std::span<PairedComparison> pairs, const Document& doc, const FrequencyTable& table);

}  // namespace ctxprobe
