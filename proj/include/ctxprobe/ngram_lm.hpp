#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ctxprobe/corpus.hpp"
#include "ctxprobe/provider.hpp"

namespace ctxprobe {

struct LmParams {
  int n_lm = 3;
  double lambda = 0.7;
  double alpha = 0.5;
  int n_cache = 2;

  /// Throws ConfigError unless n_lm >= 1, 0 < lambda < 1, alpha > 0, 1 <= n_cache <= n_lm.
  void validate() const;
};

/// Witten-Bell backoff n-gram model interpolated with a cache over the
/// supplied context window:
///
///   p(w | window) = lambda * p_wb(w | last n_lm-1 tokens) + (1 - lambda) * p_cache(w | window)
///
/// p_wb recurses down to a uniform distribution over the vocabulary.
/// p_cache is the alpha-smoothed distribution of continuations of the last
/// n_cache-1 window tokens among the n_cache-grams inside the window; when
/// nothing continues that history it falls back to the alpha-smoothed
/// unigram frequency of the window (uniform for an empty window).
class CacheNGramLM : public LogProbProvider {
 public:
  struct Successors {
    std::uint64_t total = 0;
    std::map<TokenId, std::uint64_t> counts;
  };
  using History = std::vector<TokenId>;

  static CacheNGramLM train(std::span<const Document> corpus, std::size_t vocab_size, const LmParams& params);

  const LmParams& params() const { return params_; }
  std::size_t vocab_size() const override { return vocab_size_; }
  std::string name() const override { return "builtin-cache-ngram"; }

  /// Full interpolated distribution for the next token.
  std::vector<double> distribution(std::span<const TokenId> context) const;
  std::vector<double> backoff_distribution(std::span<const TokenId> context) const;
  std::vector<double> cache_distribution(std::span<const TokenId> window) const;

  PredictionRecord predict(std::span<const TokenId> context, TokenId target) const;
  PredictionRecord score(const ScoreRequest& request) const override;

  /// Text artifact: hyperparameters, vocabulary fingerprint, and every count
  /// in sorted order, so identical training yields identical bytes.
  void save(const std::filesystem::path& path, const std::string& vocab_fingerprint) const;
  /// Throws ValidationError when the artifact was trained against a different vocabulary.
  static CacheNGramLM load(const std::filesystem::path& path, const std::string& vocab_fingerprint);

  /// Counts for histories of length `order - 1`; order is 1-based.
  const std::map<History, Successors>& counts(int order) const { return counts_.at(order - 1); }

 private:
  LmParams params_;
  std::size_t vocab_size_ = 0;
  std::vector<std::map<History, Successors>> counts_;
};

}  // namespace ctxprobe
