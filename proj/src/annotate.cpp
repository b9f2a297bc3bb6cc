#include "ctxprobe/annotate.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <string>

#include "ctxprobe/error.hpp"
#include "ctxprobe/hash.hpp"
#include "ctxprobe/parallel.hpp"

namespace ctxprobe {
namespace {

using Index = std::ptrdiff_t;

void check_ngram_args(const Document& doc, std::size_t i, std::size_t n, std::size_t k) {
  if (n < 1) throw Error("N must be >= 1");
  if (n > k) throw Error("N=" + std::to_string(n) + " exceeds K=" + std::to_string(k));
  if (i + 1 < 2 * k) throw Error("token " + std::to_string(i) + " precedes 2K-1=" + std::to_string(2 * k - 1));
  if (n > i + 1) throw Error("N=" + std::to_string(n) + " exceeds i+1");
  if (i >= doc.size()) throw Error("token index " + std::to_string(i) + " outside document");
}

// Start positions of N-grams lying wholly inside each window of token i.
struct WindowStarts {
  Index orig_lo, orig_hi, new_lo, new_hi;
};

WindowStarts window_starts(std::size_t i, std::size_t n, std::size_t k) {
  const Index ii = static_cast<Index>(i), nn = static_cast<Index>(n), kk = static_cast<Index>(k);
  return {ii - kk, ii - nn, std::max<Index>(0, ii - 2 * kk), ii - kk - nn};
}

struct SpanKey {
  const TokenId* data;
  std::size_t len;
  bool operator==(const SpanKey& o) const { return std::equal(data, data + len, o.data, o.data + o.len); }
};

struct SpanKeyHash {
  std::size_t operator()(const SpanKey& k) const {
    Fnv1a h;
    for (std::size_t j = 0; j < k.len; ++j) h.update_u64(k.data[j]);
    return static_cast<std::size_t>(h.digest());
  }
};

// Multiset of interned N-gram ids over a range of start positions whose
// bounds only move forward.
class SlidingCounter {
 public:
  SlidingCounter(const std::vector<std::uint32_t>& ids, std::size_t distinct) : ids_(ids), counts_(distinct, 0) {}

  void move_to(Index lo, Index hi) {
    for (Index j = lo_; j <= std::min(lo - 1, hi_); ++j) --counts_[ids_[static_cast<std::size_t>(j)]];
    for (Index j = std::max(hi_ + 1, lo); j <= hi; ++j) ++counts_[ids_[static_cast<std::size_t>(j)]];
    lo_ = lo;
    hi_ = hi;
  }
  std::uint64_t count(std::uint32_t id) const { return counts_[id]; }

 private:
  const std::vector<std::uint32_t>& ids_;
  std::vector<std::uint32_t> counts_;
  Index lo_ = 0, hi_ = -1;
};

}  // namespace

double new_occurrence_ratio(std::uint64_t count_new, std::uint64_t count_original) {
  return (static_cast<double>(count_new) + 1.0) / (static_cast<double>(count_original) + 1.0);
}

NGramStats ngram_stats(const Document& doc, std::size_t i, std::size_t n, std::size_t k) {
  check_ngram_args(doc, i, n, k);
  const auto& t = doc.tokens;
  const auto gram = t.begin() + static_cast<Index>(i + 1 - n);
  auto count_in = [&](Index lo, Index hi) {
    std::uint64_t c = 0;
    for (Index j = lo; j <= hi; ++j)
      if (std::equal(gram, gram + static_cast<Index>(n), t.begin() + j)) ++c;
    return c;
  };
  const auto w = window_starts(i, n, k);
  NGramStats s;
  s.token_index = i;
  s.n = n;
  s.count_original = count_in(w.orig_lo, w.orig_hi);
  s.count_new = count_in(w.new_lo, w.new_hi);
  s.ratio = new_occurrence_ratio(s.count_new, s.count_original);
  return s;
}

std::vector<NGramStats> ngram_stats_all(const Document& doc, std::size_t n, std::size_t k) {
  std::vector<NGramStats> out;
  if (doc.size() < 2 * k) return out;
  check_ngram_args(doc, 2 * k - 1, n, k);

  const std::size_t starts = doc.size() - n + 1;
  std::vector<std::uint32_t> ids(starts);
  std::unordered_map<SpanKey, std::uint32_t, SpanKeyHash> intern;
  intern.reserve(starts);
  for (std::size_t j = 0; j < starts; ++j) {
    auto [it, inserted] = intern.try_emplace(SpanKey{doc.tokens.data() + j, n}, static_cast<std::uint32_t>(intern.size()));
    ids[j] = it->second;
  }

  SlidingCounter original(ids, intern.size()), fresh(ids, intern.size());
  out.reserve(doc.size() - (2 * k - 1));
  for (std::size_t i = 2 * k - 1; i < doc.size(); ++i) {
    const auto w = window_starts(i, n, k);
    original.move_to(w.orig_lo, w.orig_hi);
    fresh.move_to(w.new_lo, w.new_hi);
    const auto g = ids[i + 1 - n];
    NGramStats s;
    s.token_index = i;
    s.n = n;
    s.count_original = original.count(g);
    s.count_new = fresh.count(g);
    s.ratio = new_occurrence_ratio(s.count_new, s.count_original);
    out.push_back(s);
  }
  return out;
}

SubwordPartition subword_partition(const Document& doc) {
  SubwordPartition p;
  for (std::size_t i = 0; i < doc.size(); ++i) (doc.is_first_subword(i) ? p.first : p.latter).push_back(i);
  return p;
}

void FrequencyTable::add(TokenId id, std::uint64_t count) {
  if (count == 0) return;
  counts_[id] += count;
  total_ += count;
}

std::uint64_t FrequencyTable::count(TokenId id) const {
  auto it = counts_.find(id);
  return it == counts_.end() ? 0 : it->second;
}

void FrequencyTable::merge(const FrequencyTable& other) {
  for (const auto& [id, c] : other.counts_) add(id, c);
}

void FrequencyTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write frequency table " + path.string());
  out << "#total\t" << total_ << '\n';
  std::map<TokenId, std::uint64_t> sorted(counts_.begin(), counts_.end());
  for (const auto& [id, c] : sorted) out << id << '\t' << c << '\n';
  if (!out) throw Error("failed writing frequency table " + path.string());
}

FrequencyTable FrequencyTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read frequency table " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("#total\t", 0) != 0)
    throw ValidationError(path.string() + ": missing #total header");
  const auto declared = std::stoull(line.substr(7));
  FrequencyTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ValidationError(path.string() + ": expected token_id<TAB>count");
    t.add(static_cast<TokenId>(std::stoul(line.substr(0, tab))), std::stoull(line.substr(tab + 1)));
  }
  if (t.total() != declared) throw ValidationError(path.string() + ": counts do not sum to the declared total");
  return t;
}

FrequencyTable build_frequency_table(std::span<const std::filesystem::path> corpus_paths, const Vocabulary& vocab,
                                     std::size_t workers) {
  const auto files = expand_paths(corpus_paths);
  std::vector<FrequencyTable> partial(files.size());
  parallel_for(files.size(), workers, [&](std::size_t f) {
    std::ifstream in(files[f], std::ios::binary);
    if (!in) throw Error("cannot read frequency corpus " + files[f].string());
    std::string line;
    auto& table = partial[f];
    while (std::getline(in, line))
      for (const auto& [word, space] : split_words(line))
        for (TokenId id : tokenize_word(word, vocab)) table.add(id);
  });
  FrequencyTable total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

void annotate_ngrams(std::span<PairedComparison> pairs, const Document& doc, std::size_t n) {
  if (pairs.empty()) return;
  const auto k = pairs.front().k;
  const auto stats = ngram_stats_all(doc, n, k);
  const std::size_t first = 2 * k - 1;
  for (auto& p : pairs) {
    if (p.k != k || p.doc_id != doc.doc_id || p.token_index < first || p.token_index >= doc.size())
      throw Error("pair does not belong to document " + doc.doc_id + " at K=" + std::to_string(k));
    const auto& s = stats[p.token_index - first];
    p.ngram_n = n;
    p.count_new = s.count_new;
    p.count_original = s.count_original;
    p.ngram_ratio = s.ratio;
  }
}

void annotate_frequency(std::span<PairedComparison> pairs, const Document& doc, const FrequencyTable& table) {
  for (auto& p : pairs) p.frequency = table.count(doc.tokens.at(p.token_index));
}

}  // namespace ctxprobe
