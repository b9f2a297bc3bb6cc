#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctxprobe/corpus.hpp"
#include "ctxprobe/pairs.hpp"
#include "ctxprobe/provider.hpp"

namespace ctxprobe {

/// Context-length tiers, their strides, and the (K, 2K) pairs to compare.
struct SweepConfig {
  std::vector<std::size_t> context_lens;
  std::map<std::size_t, std::size_t> stride;
  std::vector<std::pair<std::size_t, std::size_t>> comparison_pairs;

  /// Strides default to K / divisor (at least 1); every (K, 2K) with both
  /// tiers present becomes a comparison pair.
  static SweepConfig with_stride_divisor(std::vector<std::size_t> context_lens, std::size_t divisor);

  std::size_t stride_for(std::size_t k) const;
  /// Throws ConfigError unless every K is even and >= 2, tiers ascend
  /// strictly, 1 <= S <= K, and both members of each pair are tiers.
  void validate() const;
};

/// One chunk of the sliding-window protocol: tokens [score_begin, score_end)
/// are scored from their predecessors in [chunk_start, i).
struct ChunkSpan {
  std::size_t chunk_start = 0;
  std::size_t score_begin = 0;
  std::size_t score_end = 0;
};

/// Chunks of length K at starts 0, S, 2S, ... The first scores all of its
/// tokens, later ones their last S. If the grid leaves an unscored suffix a
/// final chunk ending at n scores it. Requires n >= K.
std::vector<ChunkSpan> plan_chunks(std::size_t n, std::size_t k, std::size_t stride);

struct SweepResult {
  std::string doc_id;
  std::size_t k = 0;
  std::size_t stride = 0;
  /// records[i] is token i's record.
  std::vector<PredictionRecord> records;
  /// Mean token-perplexity, nats.
  double ppl = 0.0;
};

double mean_token_perplexity(std::span<const PredictionRecord> records);

/// Scores every token of `doc` at tier K. Chunks run on up to `workers`
/// threads; results do not depend on the worker count.
SweepResult run_sweep_tier(const LogProbProvider& provider, const Document& doc, std::size_t k, std::size_t stride,
                           std::size_t workers = 1);

/// Runs every tier of `config`; tiers longer than the document are skipped
/// and reported through `skipped` when given.
std::vector<SweepResult> run_sweep(const LogProbProvider& provider, const Document& doc, const SweepConfig& config,
                                   std::size_t workers = 1, std::vector<std::size_t>* skipped = nullptr);

struct PplRow {
  std::string doc_id;
  std::size_t k = 0;
  double ppl = 0.0;
};

struct PplTable {
  std::vector<PplRow> per_document;
  /// Per tier, unweighted mean of document perplexities.
  std::map<std::size_t, double> corpus;
};

PplTable ppl_table(std::span<const SweepResult> results);

/// Pairs tokens i >= 2K-1 of tier K with tier 2K. Throws Error unless the
/// second result's tier is twice the first's and both describe `doc`.
std::vector<PairedComparison> align_comparisons(const SweepResult& at_k, const SweepResult& at_2k, const Document& doc);

}  // namespace ctxprobe
