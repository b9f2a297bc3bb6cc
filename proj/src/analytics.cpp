#include "ctxprobe/analytics.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "ctxprobe/annotate.hpp"
#include "ctxprobe/error.hpp"

namespace ctxprobe {
namespace {

struct MeanAccumulator {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  GroupMean get() const { return {n ? sum / static_cast<double>(n) : 0.0, n}; }
};

std::optional<DeltaDStratum> stratum(const MeanAccumulator& first, const MeanAccumulator& latter) {
  if (first.n == 0 || latter.n == 0) return std::nullopt;
  DeltaDStratum s;
  s.first = first.get();
  s.latter = latter.get();
  s.delta_d = s.first.mean - s.latter.mean;
  return s;
}

}  // namespace

ChangeRatios decrease_increase_ratios(std::span<const PairedComparison> pairs, double epsilon) {
  if (pairs.empty()) throw Error("decrease/increase ratios need at least one pair");
  std::size_t dec = 0, inc = 0;
  for (const auto& p : pairs) {
    if (p.delta > epsilon)
      ++dec;
    else if (p.delta < -epsilon)
      ++inc;
  }
  const double n = static_cast<double>(pairs.size());
  ChangeRatios r;
  r.n = pairs.size();
  r.decrease = static_cast<double>(dec) / n;
  r.increase = static_cast<double>(inc) / n;
  r.unchanged = static_cast<double>(pairs.size() - dec - inc) / n;
  return r;
}

std::map<PosClass, GroupMean> pos_class_decrements(std::span<const PairedComparison> pairs) {
  std::map<PosClass, MeanAccumulator> acc;
  for (const auto& p : pairs) acc[p.pos_class].add(p.delta);
  std::map<PosClass, GroupMean> out;
  for (const auto& [c, a] : acc) out[c] = a.get();
  return out;
}

DeltaDResult delta_d(std::span<const PairedComparison> pairs, bool by_class) {
  MeanAccumulator first, latter;
  std::map<PosClass, std::pair<MeanAccumulator, MeanAccumulator>> per_class;
  for (const auto& p : pairs) {
    (p.is_first_subword ? first : latter).add(p.delta);
    auto& [f, l] = per_class[p.pos_class];
    (p.is_first_subword ? f : l).add(p.delta);
  }
  DeltaDResult r;
  r.overall = stratum(first, latter);
  if (!r.overall) r.omitted.emplace_back("overall");
  if (by_class) {
    for (auto c : kAllPosClasses) {
      if (c == PosClass::other) continue;
      auto it = per_class.find(c);
      std::optional<DeltaDStratum> s;
      if (it != per_class.end()) s = stratum(it->second.first, it->second.second);
      if (s)
        r.by_class[c] = *s;
      else
        r.omitted.emplace_back(to_string(c));
    }
  }
  return r;
}

CorrelationResult ngram_correlation(std::span<const PairedComparison> pairs) {
  std::vector<double> ratios, deltas;
  ratios.reserve(pairs.size());
  deltas.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.ngram_n == 0) throw Error("pairs lack N-gram annotations");
    ratios.push_back(p.ngram_ratio);
    deltas.push_back(p.delta);
  }
  if (ratios.size() >= 3 && std::all_of(ratios.begin(), ratios.end(), [&](double v) { return v == ratios.front(); }))
    throw UndefinedCorrelation("no ΔN variation");
  return spearman(ratios, deltas);
}

std::vector<NGramSweepPoint> ngram_sweep(std::span<PairedComparison> pairs, std::span<const Document> docs,
                                         std::size_t n_lo, std::size_t n_hi) {
  if (n_lo < 1 || n_lo > n_hi) throw ConfigError("N range must satisfy 1 <= lo <= hi");
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& d : docs) by_id[d.doc_id] = &d;

  // Pairs arrive grouped by (doc, K); annotate each contiguous run.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t b = 0; b < pairs.size();) {
    std::size_t e = b + 1;
    while (e < pairs.size() && pairs[e].doc_id == pairs[b].doc_id && pairs[e].k == pairs[b].k) ++e;
    runs.emplace_back(b, e);
    b = e;
  }

  std::vector<NGramSweepPoint> points;
  for (std::size_t n = n_lo; n <= n_hi; ++n) {
    for (const auto& [b, e] : runs) {
      auto it = by_id.find(pairs[b].doc_id);
      if (it == by_id.end()) throw Error("no document for pairs of " + pairs[b].doc_id);
      annotate_ngrams(pairs.subspan(b, e - b), *it->second, n);
    }
    NGramSweepPoint pt;
    pt.n = n;
    try {
      pt.result = ngram_correlation(pairs);
    } catch (const UndefinedCorrelation& ex) {
      pt.note = ex.what();
    }
    points.push_back(std::move(pt));
  }
  return points;
}

std::vector<FrequencyGroup> grouped_frequency_correlation(std::span<const PairedComparison> pairs,
                                                          std::optional<double> extra_breakpoint) {
  if (extra_breakpoint && !(*extra_breakpoint > 1.0)) throw ConfigError("extra ΔN breakpoint must exceed 1");
  std::vector<FrequencyGroup> groups = {{"A", "ΔN<1", 0, {}, {}}, {"B", "ΔN=1", 0, {}, {}}};
  if (extra_breakpoint) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", *extra_breakpoint);
    const std::string b = buf;
    groups.push_back({"C", "1<ΔN<=" + b, 0, {}, {}});
    groups.push_back({"D", "ΔN>" + b, 0, {}, {}});
  } else {
    groups.push_back({"C", "ΔN>1", 0, {}, {}});
  }

  std::vector<std::vector<double>> fr(groups.size()), change(groups.size());
  for (const auto& p : pairs) {
    if (p.ngram_n == 0) throw Error("pairs lack N-gram annotations");
    std::size_t g;
    if (p.count_new < p.count_original)
      g = 0;
    else if (p.count_new == p.count_original)
      g = 1;
    else
      g = (extra_breakpoint && p.ngram_ratio > *extra_breakpoint) ? 3 : 2;
    fr[g].push_back(static_cast<double>(p.frequency));
    change[g].push_back(p.abs_delta);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    groups[g].n = fr[g].size();
    if (fr[g].size() < 3) {
      groups[g].note = "fewer than 3 tokens";
      continue;
    }
    try {
      groups[g].result = spearman(fr[g], change[g]);
    } catch (const UndefinedCorrelation& ex) {
      groups[g].note = ex.what();
    }
  }
  return groups;
}

std::map<std::size_t, ConfidenceTier> confidence_stats(std::span<const SweepResult> sweeps) {
  struct Acc {
    double entropy = 0.0, max_prob = 0.0;
    std::size_t n = 0;
  };
  std::map<std::size_t, std::pair<Acc, Acc>> acc;
  for (const auto& s : sweeps) {
    auto& [t, f] = acc[s.k];
    for (const auto& r : s.records) {
      auto& a = r.correct ? t : f;
      a.entropy += r.entropy;
      a.max_prob += r.max_prob;
      ++a.n;
    }
  }
  auto finish = [](const Acc& a) -> std::optional<ConfidenceGroup> {
    if (a.n == 0) return std::nullopt;
    const double n = static_cast<double>(a.n);
    return ConfidenceGroup{a.entropy / n, a.max_prob / n, a.n};
  };
  std::map<std::size_t, ConfidenceTier> out;
  for (const auto& [k, tf] : acc) out[k] = {finish(tf.first), finish(tf.second)};
  return out;
}

}  // namespace ctxprobe
