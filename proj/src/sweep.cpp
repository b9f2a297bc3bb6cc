#include "ctxprobe/sweep.hpp"

#include <algorithm>

#include "ctxprobe/error.hpp"
#include "ctxprobe/parallel.hpp"

namespace ctxprobe {

SweepConfig SweepConfig::with_stride_divisor(std::vector<std::size_t> context_lens, std::size_t divisor) {
  if (divisor == 0) throw ConfigError("stride divisor must be positive");
  SweepConfig cfg;
  cfg.context_lens = std::move(context_lens);
  for (auto k : cfg.context_lens) cfg.stride[k] = std::max<std::size_t>(1, k / divisor);
  for (auto k : cfg.context_lens)
    if (std::find(cfg.context_lens.begin(), cfg.context_lens.end(), 2 * k) != cfg.context_lens.end())
      cfg.comparison_pairs.emplace_back(k, 2 * k);
  return cfg;
}

std::size_t SweepConfig::stride_for(std::size_t k) const {
  auto it = stride.find(k);
  if (it == stride.end()) throw ConfigError("no stride configured for K=" + std::to_string(k));
  return it->second;
}

void SweepConfig::validate() const {
  if (context_lens.empty()) throw ConfigError("context_lens must not be empty");
  for (std::size_t i = 0; i < context_lens.size(); ++i) {
    const auto k = context_lens[i];
    if (k < 2 || k % 2 != 0) throw ConfigError("context length " + std::to_string(k) + " must be even and >= 2");
    if (i > 0 && context_lens[i - 1] >= k) throw ConfigError("context_lens must be strictly ascending");
    const auto s = stride_for(k);
    if (s < 1 || s > k) throw ConfigError("stride for K=" + std::to_string(k) + " must lie in [1, K]");
  }
  auto has = [&](std::size_t k) { return std::find(context_lens.begin(), context_lens.end(), k) != context_lens.end(); };
  for (const auto& [k, k2] : comparison_pairs) {
    if (k2 != 2 * k) throw ConfigError("comparison pair must be (K, 2K)");
    if (!has(k) || !has(k2))
      throw ConfigError("comparison pair (" + std::to_string(k) + ", " + std::to_string(k2) + ") names a missing tier");
  }
}

std::vector<ChunkSpan> plan_chunks(std::size_t n, std::size_t k, std::size_t stride) {
  if (k == 0 || stride == 0 || stride > k) throw ConfigError("chunking needs 1 <= S <= K");
  if (n < k) throw Error("document of " + std::to_string(n) + " tokens is shorter than K=" + std::to_string(k));
  std::vector<ChunkSpan> chunks;
  chunks.push_back({0, 0, k});
  std::size_t covered = k;
  for (std::size_t start = stride; start + k <= n; start += stride) {
    chunks.push_back({start, start + k - stride, start + k});
    covered = start + k;
  }
  if (covered < n) chunks.push_back({n - k, covered, n});
  return chunks;
}

double mean_token_perplexity(std::span<const PredictionRecord> records) {
  if (records.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : records) sum += -r.log_prob;
  return sum / static_cast<double>(records.size());
}

SweepResult run_sweep_tier(const LogProbProvider& provider, const Document& doc, std::size_t k, std::size_t stride,
                           std::size_t workers) {
  const auto chunks = plan_chunks(doc.size(), k, stride);
  SweepResult result;
  result.doc_id = doc.doc_id;
  result.k = k;
  result.stride = stride;
  result.records.resize(doc.size());
  std::span<const TokenId> tokens(doc.tokens);

  parallel_for(chunks.size(), workers, [&](std::size_t c) {
    const auto& ch = chunks[c];
    for (std::size_t i = ch.score_begin; i < ch.score_end; ++i) {
      ScoreRequest req;
      req.doc_id = doc.doc_id;
      req.tier = k;
      req.token_index = i;
      req.context = tokens.subspan(ch.chunk_start, i - ch.chunk_start);
      req.target = tokens[i];
      auto rec = provider.score(req);
      rec.doc_id = doc.doc_id;
      rec.token_index = i;
      result.records[i] = std::move(rec);
    }
  });
  result.ppl = mean_token_perplexity(result.records);
  return result;
}

std::vector<SweepResult> run_sweep(const LogProbProvider& provider, const Document& doc, const SweepConfig& config,
                                   std::size_t workers, std::vector<std::size_t>* skipped) {
  config.validate();
  std::vector<SweepResult> out;
  for (auto k : config.context_lens) {
    if (doc.size() < k) {
      if (skipped) skipped->push_back(k);
      continue;
    }
    out.push_back(run_sweep_tier(provider, doc, k, config.stride_for(k), workers));
  }
  return out;
}

PplTable ppl_table(std::span<const SweepResult> results) {
  if (results.empty()) throw Error("perplexity table needs at least one sweep result");
  PplTable table;
  std::map<std::size_t, std::pair<double, std::size_t>> sums;
  for (const auto& r : results) {
    table.per_document.push_back({r.doc_id, r.k, r.ppl});
    auto& [sum, count] = sums[r.k];
    sum += r.ppl;
    ++count;
  }
  for (const auto& [k, sc] : sums) table.corpus[k] = sc.first / static_cast<double>(sc.second);
  return table;
}

std::vector<PairedComparison> align_comparisons(const SweepResult& at_k, const SweepResult& at_2k, const Document& doc) {
  if (at_2k.k != 2 * at_k.k)
    throw Error("tier mismatch: expected K=" + std::to_string(2 * at_k.k) + ", got " + std::to_string(at_2k.k));
  if (at_k.doc_id != doc.doc_id || at_2k.doc_id != doc.doc_id)
    throw Error("sweep results do not belong to document " + doc.doc_id);
  if (at_k.records.size() != doc.size() || at_2k.records.size() != doc.size())
    throw Error("sweep results do not cover document " + doc.doc_id);

  std::vector<PairedComparison> pairs;
  const std::size_t first = 2 * at_k.k - 1;
  for (std::size_t i = first; i < doc.size(); ++i) {
    const auto& a = at_k.records[i];
    const auto& b = at_2k.records[i];
    PairedComparison p;
    p.doc_id = doc.doc_id;
    p.token_index = i;
    p.k = at_k.k;
    p.pos_class = doc.pos_class[i];
    p.is_first_subword = doc.is_first_subword(i);
    p.log_prob_k = a.log_prob;
    p.log_prob_2k = b.log_prob;
    const double tp_k = -a.log_prob;
    const double tp_2k = -b.log_prob;
    p.delta = -(tp_2k - tp_k);
    p.abs_delta = tp_2k > tp_k ? tp_2k - tp_k : tp_k - tp_2k;
    p.entropy_k = a.entropy;
    p.entropy_2k = b.entropy;
    p.max_prob_k = a.max_prob;
    p.max_prob_2k = b.max_prob;
    p.correct_k = a.correct;
    p.correct_2k = b.correct;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace ctxprobe
