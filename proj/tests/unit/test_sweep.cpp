#include <atomic>
#include <cmath>
#include <random>
#include <set>

#include "ctxprobe/error.hpp"
#include "ctxprobe/ngram_lm.hpp"
#include "ctxprobe/record_store.hpp"
#include "ctxprobe/sweep.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace ctxprobe;

namespace {

// Chunk start that scores token i, derived from the chunk grid rather than
// from plan_chunks.
std::size_t expected_chunk_start(std::size_t i, std::size_t n, std::size_t k, std::size_t s) {
  if (i < k) return 0;
  const std::size_t c = s * ((i - k) / s + 1);
  return c + k <= n ? c : n - k;
}

class CountingProvider : public LogProbProvider {
 public:
  explicit CountingProvider(const LogProbProvider& inner) : inner_(inner) {}
  PredictionRecord score(const ScoreRequest& r) const override {
    ++calls;
    return inner_.score(r);
  }
  std::size_t vocab_size() const override { return inner_.vocab_size(); }
  std::string name() const override { return "counting"; }
  mutable std::atomic<std::size_t> calls{0};

 private:
  const LogProbProvider& inner_;
};

// Fixed log probability; records only what the sweep asked for.
class ConstantProvider : public LogProbProvider {
 public:
  explicit ConstantProvider(double lp) : lp_(lp) {}
  PredictionRecord score(const ScoreRequest& r) const override {
    PredictionRecord rec;
    rec.context_len = r.context.size();
    rec.log_prob = lp_;
    rec.max_prob = std::exp(lp_);
    return rec;
  }
  std::size_t vocab_size() const override { return 2; }
  std::string name() const override { return "constant"; }

 private:
  double lp_;
};

SweepResult fake_result(const std::string& doc, std::size_t k, std::vector<double> log_probs) {
  SweepResult r;
  r.doc_id = doc;
  r.k = k;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    PredictionRecord rec;
    rec.doc_id = doc;
    rec.token_index = i;
    rec.log_prob = log_probs[i];
    rec.max_prob = std::exp(log_probs[i]);
    r.records.push_back(rec);
  }
  r.ppl = mean_token_perplexity(r.records);
  return r;
}

}  // namespace

TEST_CASE("chunk plan: hand-traced example with K=4, S=2") {
  auto chunks = plan_chunks(6, 4, 2);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].chunk_start == 0);
  CHECK(chunks[0].score_begin == 0);
  CHECK(chunks[0].score_end == 4);
  CHECK(chunks[1].chunk_start == 2);
  CHECK(chunks[1].score_begin == 4);
  CHECK(chunks[1].score_end == 6);

  // Token 5 is scored from [2, 3, 4].
  std::vector<std::vector<std::size_t>> seen;
  struct Recorder : LogProbProvider {
    std::vector<std::vector<TokenId>>* out;
    PredictionRecord score(const ScoreRequest& r) const override {
      if (r.token_index == 5) out->emplace_back(r.context.begin(), r.context.end());
      PredictionRecord rec;
      rec.log_prob = -1;
      return rec;
    }
    std::size_t vocab_size() const override { return 6; }
    std::string name() const override { return "rec"; }
  } rec;
  std::vector<std::vector<TokenId>> contexts;
  rec.out = &contexts;
  run_sweep_tier(rec, testing::raw_document({0, 1, 2, 3, 4, 5}), 4, 2);
  REQUIRE(contexts.size() == 1);
  CHECK(contexts[0] == std::vector<TokenId>{2, 3, 4});
}

TEST_CASE("chunk plan: S = K gives non-overlapping chunks") {
  auto chunks = plan_chunks(12, 4, 4);
  REQUIRE(chunks.size() == 3);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(chunks[c].chunk_start == 4 * c);
    CHECK(chunks[c].score_begin == 4 * c);
    CHECK(chunks[c].score_end == 4 * c + 4);
  }
}

TEST_CASE("chunk plan: S = 1 scores each later token from its K-1 predecessors in the chunk") {
  auto chunks = plan_chunks(10, 4, 1);
  CHECK(chunks.size() == 7);
  for (std::size_t c = 1; c < chunks.size(); ++c) {
    CHECK(chunks[c].score_end - chunks[c].score_begin == 1);
    CHECK(chunks[c].score_begin - chunks[c].chunk_start == 3);
  }
}

TEST_CASE("chunk plan: unaligned tail gets a final chunk ending at the document end") {
  auto chunks = plan_chunks(7, 4, 2);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[2].chunk_start == 3);
  CHECK(chunks[2].score_begin == 6);
  CHECK(chunks[2].score_end == 7);
  CHECK_THROWS_AS(plan_chunks(3, 4, 2), Error);
  CHECK_THROWS_AS(plan_chunks(8, 4, 5), ConfigError);
  CHECK_THROWS_AS(plan_chunks(8, 4, 0), ConfigError);
}

TEST_CASE("chunk plan: scored positions partition the document (property)") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 1 + rng() % 40;
    const std::size_t s = 1 + rng() % k;
    const std::size_t n = k + rng() % 200;
    std::vector<int> hits(n, 0);
    for (const auto& ch : plan_chunks(n, k, s)) {
      CHECK(ch.chunk_start + k >= ch.score_end);
      CHECK(ch.score_end <= n);
      for (std::size_t i = ch.score_begin; i < ch.score_end; ++i) {
        ++hits[i];
        CHECK(ch.chunk_start == expected_chunk_start(i, n, k, s));
        if (ch.chunk_start > 0) {
          CHECK(i - ch.chunk_start >= k - s);
          CHECK(i - ch.chunk_start < k);
        }
      }
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("sweep: every record matches re-evaluation on the reconstructed window") {
  std::mt19937_64 rng(8);
  const std::size_t v = 25;
  const auto doc = testing::raw_document(testing::random_tokens(rng, 700, v));
  std::vector<Document> corpus = {testing::raw_document(testing::random_tokens(rng, 2000, v))};
  const auto lm = CacheNGramLM::train(corpus, v, LmParams{});
  for (auto [k, s] : {std::pair<std::size_t, std::size_t>{32, 1}, {32, 5}, {64, 64}, {64, 7}}) {
    CountingProvider counting(lm);
    const auto result = run_sweep_tier(counting, doc, k, s, 3);
    CHECK(counting.calls == doc.size());
    REQUIRE(result.records.size() == doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto start = expected_chunk_start(i, doc.size(), k, s);
      std::vector<TokenId> window(doc.tokens.begin() + start, doc.tokens.begin() + i);
      auto expect = lm.predict(window, doc.tokens[i]);
      const auto& got = result.records[i];
      CHECK(got.log_prob == expect.log_prob);
      CHECK(got.context_len == i - start);
      CHECK(got.token_index == i);
    }
    double sum = 0;
    for (const auto& r : result.records) sum -= r.log_prob;
    CHECK(std::abs(result.ppl - sum / static_cast<double>(doc.size())) <= 1e-12);
    // Scheduling does not change the output.
    CHECK(run_sweep_tier(lm, doc, k, s, 1).records == result.records);
  }
}

TEST_CASE("sweep: documents shorter than a tier are skipped for it") {
  ConstantProvider p(-1.0);
  auto cfg = SweepConfig::with_stride_divisor({4, 8}, 2);
  std::vector<std::size_t> skipped;
  auto results = run_sweep(p, testing::raw_document({0, 1, 0, 1, 0, 1}), cfg, 1, &skipped);
  REQUIRE(results.size() == 1);
  CHECK(results[0].k == 4);
  CHECK(skipped == std::vector<std::size_t>{8});
}

TEST_CASE("sweep: a store missing a record reports doc, tier and index") {
  RecordStore empty;
  try {
    run_sweep_tier(empty, testing::raw_document({0, 1, 0, 1}, "doc7"), 2, 1);
    FAIL("expected not-found");
  } catch (const NotFoundError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("doc7") != std::string::npos);
    CHECK(msg.find("K=2") != std::string::npos);
    CHECK(msg.find("i=0") != std::string::npos);
  }
}

TEST_CASE("sweep config validation") {
  auto cfg = SweepConfig::with_stride_divisor({256, 512, 1024, 2048}, 200);
  CHECK(cfg.stride_for(256) == 1);
  CHECK(cfg.stride_for(2048) == 10);
  CHECK(cfg.comparison_pairs.size() == 3);
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(SweepConfig::with_stride_divisor({3}, 1).validate(), ConfigError);
  CHECK_THROWS_AS(SweepConfig::with_stride_divisor({8, 4}, 1).validate(), ConfigError);
  auto bad = SweepConfig::with_stride_divisor({4}, 1);
  bad.stride[4] = 5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = SweepConfig::with_stride_divisor({4, 8}, 1);
  bad.comparison_pairs.emplace_back(4, 16);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(SweepConfig::with_stride_divisor({4}, 0), ConfigError);
}

TEST_CASE("ppl table: constant probabilities and the corpus mean") {
  ConstantProvider half(-std::log(2.0));
  auto r = run_sweep_tier(half, testing::raw_document({0, 1, 0, 1, 1}), 2, 1);
  CHECK(r.ppl == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  std::vector<SweepResult> two = {fake_result("a", 4, {-1.0, -1.0}), fake_result("b", 4, {-3.0, -3.0})};
  auto table = ppl_table(two);
  CHECK(table.per_document.size() == 2);
  CHECK(table.corpus.at(4) == 2.0);
  CHECK_THROWS_AS(ppl_table({}), Error);
}

TEST_CASE("align: index range starts at 2K-1") {
  const std::size_t k = 4;
  auto doc_short = testing::raw_document(std::vector<TokenId>(2 * k - 1, 0));
  auto a = fake_result("d", k, std::vector<double>(2 * k - 1, -1.0));
  auto b = fake_result("d", 2 * k, std::vector<double>(2 * k - 1, -1.0));
  CHECK(align_comparisons(a, b, doc_short).empty());

  auto doc = testing::raw_document(std::vector<TokenId>(2 * k + 1, 0));
  a = fake_result("d", k, std::vector<double>(2 * k + 1, -1.0));
  b = fake_result("d", 2 * k, std::vector<double>(2 * k + 1, -1.0));
  auto pairs = align_comparisons(a, b, doc);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].token_index == 2 * k - 1);
  CHECK(pairs[1].token_index == 2 * k);
  CHECK(pairs[0].delta == 0.0);
  CHECK(pairs[0].abs_delta == 0.0);

  auto wrong = fake_result("d", 3 * k, std::vector<double>(2 * k + 1, -1.0));
  CHECK_THROWS_AS(align_comparisons(a, wrong, doc), Error);
  auto other_doc = fake_result("e", 2 * k, std::vector<double>(2 * k + 1, -1.0));
  CHECK_THROWS_AS(align_comparisons(a, other_doc, doc), Error);
}

TEST_CASE("align: decrement is the drop in token perplexity") {
  auto doc = testing::raw_document({0, 0, 0, 0, 0, 0});
  auto a = fake_result("d", 2, {-1, -1, -1, -2.0, -0.5, -1.0});
  auto b = fake_result("d", 4, {-1, -1, -1, -1.5, -0.75, -1.0});
  auto pairs = align_comparisons(a, b, doc);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].delta == 0.5);
  CHECK(pairs[1].delta == -0.25);
  CHECK(pairs[1].abs_delta == 0.25);
  CHECK(pairs[2].delta == 0.0);
}

TEST_CASE("align: tiers keep contexts within one stride of K (property)") {
  std::mt19937_64 rng(2);
  const std::size_t v = 10;
  std::vector<Document> corpus = {testing::raw_document(testing::random_tokens(rng, 500, v))};
  const auto lm = CacheNGramLM::train(corpus, v, LmParams{});
  const auto doc = testing::raw_document(testing::random_tokens(rng, 300, v));
  const auto at_k = run_sweep_tier(lm, doc, 32, 4);
  const auto at_2k = run_sweep_tier(lm, doc, 64, 8);
  for (const auto& p : align_comparisons(at_k, at_2k, doc)) {
    const auto& ra = at_k.records[p.token_index];
    const auto& rb = at_2k.records[p.token_index];
    CHECK(ra.context_len >= 28);
    CHECK(ra.context_len <= 32);
    CHECK(rb.context_len >= 56);
    CHECK(rb.context_len <= 64);
  }
}
