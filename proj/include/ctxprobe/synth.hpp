#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctxprobe/corpus.hpp"

namespace ctxprobe {

/// Parameters for a synthetic English-like corpus with recurring motifs.
///
/// Words are built from consonant-vowel syllables plus class-marking suffixes,
/// arranged by simple sentence templates with Zipfian word choice. Each
/// document owns a handful of topic words and multi-word motifs that recur
/// throughout it, so a longer context window sees more of them.
struct SynthConfig {
  std::uint64_t seed = 1;
  /// Seeds the shared lexicon; keep it fixed across train and test corpora.
  std::uint64_t lexicon_seed = 7;
  std::size_t num_docs = 10;
  std::size_t words_per_doc = 12000;
  std::size_t lexicon_per_class = 100;
  std::size_t topic_words_per_doc = 30;
  std::size_t motifs_per_doc = 16;
  std::size_t motif_min_words = 4;
  std::size_t motif_max_words = 9;
  /// Probability that a sentence slot holds a motif instead of a template sentence.
  double motif_rate = 0.7;
  /// Probability that a noun slot draws from the document's topic words.
  double topic_rate = 0.6;
  std::string doc_prefix = "doc";
};

struct SynthCorpus {
  std::vector<std::string> vocab_entries;
  std::vector<SourceText> docs;
  /// Gold Penn tags per document, aligned with split_words of each text.
  std::vector<std::vector<TaggedWord>> tags;
};

SynthCorpus generate_corpus(const SynthConfig& config);

/// Writes `docs/<doc_id>.txt`, `vocab.txt` and `tags.tsv` under `dir`.
void write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

}  // namespace ctxprobe
