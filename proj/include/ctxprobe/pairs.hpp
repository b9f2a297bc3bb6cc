#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "ctxprobe/corpus.hpp"

namespace ctxprobe {

/// One token scored at tiers K and 2K, with its covariates.
struct PairedComparison {
  std::string doc_id;
  std::size_t token_index = 0;
  std::size_t k = 0;
  PosClass pos_class = PosClass::other;
  bool is_first_subword = true;

  double log_prob_k = 0.0;
  double log_prob_2k = 0.0;
  /// Token-perplexity decrement, (-log p_K) - (-log p_2K), nats.
  double delta = 0.0;
  /// Degree of change, |(-log p_2K) - (-log p_K)|.
  double abs_delta = 0.0;

  double entropy_k = 0.0, entropy_2k = 0.0;
  double max_prob_k = 0.0, max_prob_2k = 0.0;
  bool correct_k = false, correct_2k = false;

  // Filled by the annotator.
  std::size_t ngram_n = 0;
  std::uint64_t count_new = 0;
  std::uint64_t count_original = 0;
  /// New-occurrence ratio (count_new + 1) / (count_original + 1).
  double ngram_ratio = 1.0;
  std::uint64_t frequency = 0;
};

}  // namespace ctxprobe
