#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ctxprobe/analytics.hpp"
#include "ctxprobe/config.hpp"
#include "ctxprobe/corpus.hpp"

namespace ctxprobe {

inline constexpr std::string_view kAnalyses[] = {"ratios", "pos", "subword", "ngram", "ngram-sweep", "frequency",
                                                 "confidence"};

bool is_analysis(std::string_view name);

/// Vocabulary, tokenized documents and run-log warnings for one configuration.
struct Workspace {
  RunConfig config;
  Vocabulary vocab;
  std::vector<Document> docs;
  std::size_t unknown_tags = 0;
  std::vector<std::string> warnings;

  /// Loads the vocabulary, extends it with fallback entries for every
  /// character in the configured corpora, tokenizes and tags the documents.
  static Workspace open(const RunConfig& config);

  /// Fingerprint of what determines sweep outputs: vocabulary, document
  /// tokens, provider, LM hyperparameters and tiers with their strides.
  std::string sweep_hash() const;
};

/// Machine-readable run log (`run_log.jsonl` in the output directory).
void append_run_log(const std::filesystem::path& output, std::string_view command,
                    const std::vector<std::string>& warnings);

/// Trains the built-in LM on `train_corpus` and writes the artifact.
void cmd_train(const RunConfig& config);

/// Runs every configured tier over every document and writes
/// `sweeps/<doc>.K<k>.ndjson` plus `ppl.csv`. Refuses to overwrite existing
/// sweep outputs unless `force`.
void cmd_sweep(const RunConfig& config, bool force);

/// Runs one named analysis (or "all") over existing sweep outputs and writes
/// `reports/<name>.csv` and `reports/<name>.json`.
void cmd_analyze(const RunConfig& config, std::string_view analysis);

/// Builds the frequency table for `frequency_corpus` into `freq.tsv`.
void cmd_frequency(const RunConfig& config);

std::filesystem::path sweep_file(const std::filesystem::path& output, const std::string& doc_id, std::size_t k);

}  // namespace ctxprobe
