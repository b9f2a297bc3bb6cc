#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctxprobe/corpus.hpp"
#include "ctxprobe/pairs.hpp"
#include "ctxprobe/stats.hpp"
#include "ctxprobe/sweep.hpp"

namespace ctxprobe {

struct ChangeRatios {
  double decrease = 0.0;
  double increase = 0.0;
  double unchanged = 0.0;
  std::size_t n = 0;
};

/// Fractions of pairs whose token-perplexity fell (delta > eps), rose
/// (delta < -eps) or stayed within eps. Throws Error on empty input.
ChangeRatios decrease_increase_ratios(std::span<const PairedComparison> pairs, double epsilon = 0.0);

struct GroupMean {
  double mean = 0.0;
  std::size_t n = 0;
};

/// Mean decrement per POS class; classes without members are absent.
std::map<PosClass, GroupMean> pos_class_decrements(std::span<const PairedComparison> pairs);

struct DeltaDStratum {
  double delta_d = 0.0;
  GroupMean first;
  GroupMean latter;
};

struct DeltaDResult {
  std::optional<DeltaDStratum> overall;
  std::map<PosClass, DeltaDStratum> by_class;
  /// Strata dropped because Fir or Lat was empty.
  std::vector<std::string> omitted;
};

/// Mean decrement of word-initial tokens minus that of continuation tokens,
/// overall and (optionally) per POS class. `other` is never reported per class.
DeltaDResult delta_d(std::span<const PairedComparison> pairs, bool by_class);

/// Spearman over (new-occurrence ratio, decrement). Pairs must carry N-gram
/// annotations. A constant ratio raises UndefinedCorrelation("no ΔN variation").
CorrelationResult ngram_correlation(std::span<const PairedComparison> pairs);

struct NGramSweepPoint {
  std::size_t n = 0;
  std::optional<CorrelationResult> result;
  std::string note;
};

/// Re-annotates `pairs` at each N in [n_lo, n_hi] and correlates. Documents
/// are looked up by id. Leaves `pairs` annotated at n_hi.
std::vector<NGramSweepPoint> ngram_sweep(std::span<PairedComparison> pairs, std::span<const Document> docs,
                                         std::size_t n_lo, std::size_t n_hi);

struct FrequencyGroup {
  std::string name;
  /// Human-readable membership rule.
  std::string rule;
  std::size_t n = 0;
  std::optional<CorrelationResult> result;
  std::string note;
};

/// Groups A (count_new < count_original, i.e. ratio < 1), B (equal counts,
/// ratio exactly 1) and C (ratio > 1); an optional breakpoint b > 1 splits C
/// into C (1 < ratio <= b) and D (ratio > b). Within each group, Spearman over
/// (frequency, |change|). Groups with fewer than 3 members carry no result.
std::vector<FrequencyGroup> grouped_frequency_correlation(std::span<const PairedComparison> pairs,
                                                          std::optional<double> extra_breakpoint = std::nullopt);

struct ConfidenceGroup {
  double mean_entropy = 0.0;
  double mean_max_prob = 0.0;
  std::size_t n = 0;
};

struct ConfidenceTier {
  std::optional<ConfidenceGroup> correct;
  std::optional<ConfidenceGroup> incorrect;
};

/// Per tier K, mean entropy and max probability of correctly (T) and
/// incorrectly (F) predicted tokens across all supplied sweeps.
std::map<std::size_t, ConfidenceTier> confidence_stats(std::span<const SweepResult> sweeps);

}  // namespace ctxprobe
