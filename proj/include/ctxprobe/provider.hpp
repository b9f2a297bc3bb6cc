#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "ctxprobe/corpus.hpp"

namespace ctxprobe {

/// One token's prediction at one context length.
struct PredictionRecord {
  std::string doc_id;
  std::size_t token_index = 0;
  /// Number of context tokens actually supplied.
  std::size_t context_len = 0;
  /// Natural-log probability of the true token.
  double log_prob = 0.0;
  /// Entropy of the predictive distribution, nats.
  double entropy = 0.0;
  double max_prob = 0.0;
  TokenId argmax_id = 0;
  bool correct = false;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// What the sweep engine asks of a provider. Model-backed providers use
/// `context` and `target`; record stores use the (doc_id, tier, token_index) key.
struct ScoreRequest {
  std::string_view doc_id;
  std::size_t tier = 0;
  std::size_t token_index = 0;
  std::span<const TokenId> context;
  TokenId target = 0;
};

/// Uniform scoring contract. Implementations must be reentrant.
class LogProbProvider {
 public:
  virtual ~LogProbProvider() = default;
  virtual PredictionRecord score(const ScoreRequest& request) const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual std::string name() const = 0;
};

/// Summaries of a full predictive distribution for one target.
struct DistributionSummary {
  double log_prob;
  double entropy;
  double max_prob;
  TokenId argmax_id;
  bool correct;
};

/// Entropy (nats), max and argmax of `probs`. Ties for the maximum resolve to
/// the target when it is among them, otherwise to the lowest id, so that
/// `correct` holds exactly when the target attains the maximum.
DistributionSummary summarize_distribution(std::span<const double> probs, TokenId target);

}  // namespace ctxprobe
