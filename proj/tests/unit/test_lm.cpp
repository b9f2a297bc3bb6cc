#include <cmath>
#include <numeric>
#include <random>

#include "ctxprobe/error.hpp"
#include "ctxprobe/ngram_lm.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace ctxprobe;

namespace {

CacheNGramLM train_on(std::vector<std::vector<TokenId>> docs, std::size_t v, LmParams p) {
  std::vector<Document> corpus;
  for (auto& d : docs) corpus.push_back(testing::raw_document(std::move(d)));
  return CacheNGramLM::train(corpus, v, p);
}

// Direct count formulas for a unigram backoff with a unigram cache.
double brute_unigram(const std::vector<TokenId>& corpus, std::size_t v, double lambda, double alpha,
                     const std::vector<TokenId>& ctx, TokenId w) {
  double c = 0;
  std::vector<bool> seen(v, false);
  for (auto t : corpus) {
    c += (t == w);
    seen[t] = true;
  }
  const double types = static_cast<double>(std::count(seen.begin(), seen.end(), true));
  const double n = static_cast<double>(corpus.size());
  const double backoff = (c + types / static_cast<double>(v)) / (n + types);
  double in_window = 0;
  for (auto t : ctx) in_window += (t == w);
  const double cache = (in_window + alpha) / (static_cast<double>(ctx.size()) + alpha * static_cast<double>(v));
  return lambda * backoff + (1 - lambda) * cache;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("summaries of a uniform distribution") {
  std::vector<double> probs(100, 0.01);
  auto s = summarize_distribution(probs, 37);
  CHECK(std::abs(s.entropy - std::log(100.0)) <= 1e-12);
  CHECK(std::abs(s.max_prob - 0.01) <= 1e-15);
  CHECK(s.correct);
  CHECK(s.argmax_id == 37);
  CHECK_THROWS_AS(summarize_distribution(probs, 100), Error);
}

TEST_CASE("summaries of a peaked distribution") {
  std::vector<double> probs = {0.1, 0.7, 0.2};
  auto s = summarize_distribution(probs, 2);
  CHECK(s.argmax_id == 1);
  CHECK_FALSE(s.correct);
  CHECK(s.log_prob == doctest::Approx(std::log(0.2)));
  CHECK(s.entropy == doctest::Approx(-(0.1 * std::log(0.1) + 0.7 * std::log(0.7) + 0.2 * std::log(0.2))));
}

TEST_CASE("Witten-Bell unigram on 'a a a'") {
  LmParams p;
  p.n_lm = 1;
  p.n_cache = 1;
  auto lm = train_on({{0, 0, 0}}, 2, p);
  auto d = lm.backoff_distribution({});
  // One type, three tokens: (3 + 1 * 1/2) / (3 + 1).
  CHECK(d[0] == doctest::Approx(3.5 / 4).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(0.5 / 4).epsilon(1e-15));
}

TEST_CASE("unseen history backs off to the uniform floor") {
  LmParams p;
  p.n_lm = 2;
  p.n_cache = 1;
  // Unigram counts exist, but nothing at all for a fresh vocabulary.
  auto lm = train_on({{0, 1}}, 5, p);
  auto d = lm.backoff_distribution(std::vector<TokenId>{4});
  // History {4} unseen: only the unigram level applies.
  CHECK(d[4] == doctest::Approx((0 + 2.0 / 5) / (2 + 2)));
  CHECK(d[2] == doctest::Approx(d[3]));
  for (double x : d) CHECK(x > 0);
}

TEST_CASE("cache continuation count on a hand-traced window") {
  LmParams p;
  p.alpha = 1.0;
  p.n_cache = 2;
  auto lm = train_on({{0, 1}}, 2, p);
  std::vector<TokenId> window = {0, 1, 0, 1, 0};  // a b a b a
  auto cache = lm.cache_distribution(window);
  // a->b twice, trailing a excluded: (2 + 1) / (2 + 2).
  CHECK(cache[1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(cache[0] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("cache falls back to window unigram frequency when the history never recurs") {
  LmParams p;
  p.alpha = 0.5;
  p.n_cache = 2;
  auto lm = train_on({{0}}, 3, p);
  std::vector<TokenId> window = {0, 0, 1, 2};  // history {2} has no earlier continuation
  auto cache = lm.cache_distribution(window);
  CHECK(cache[0] == doctest::Approx((2 + 0.5) / (4 + 1.5)));
  CHECK(cache[2] == doctest::Approx((1 + 0.5) / (4 + 1.5)));
  auto empty = lm.cache_distribution({});
  for (double x : empty) CHECK(x == doctest::Approx(1.0 / 3));
}

TEST_CASE("lambda near one reduces to the backoff model") {
  LmParams p;
  p.lambda = 0.999999;
  auto lm = train_on({{0, 1, 2, 1, 0, 2, 2, 1}}, 4, p);
  std::vector<TokenId> ctx = {2, 2, 2, 2, 1};
  auto full = lm.distribution(ctx);
  auto backoff = lm.backoff_distribution(ctx);
  for (std::size_t w = 0; w < full.size(); ++w) CHECK(std::abs(full[w] - backoff[w]) <= 1e-5);
}

TEST_CASE("empty context with tiny cache weight gives the smoothed unigram") {
  LmParams p;
  p.n_lm = 1;
  p.n_cache = 1;
  p.lambda = 1 - 1e-9;
  auto lm = train_on({{0, 0, 1}}, 3, p);
  auto r = lm.predict({}, 0);
  CHECK(r.context_len == 0);
  CHECK(r.log_prob == doctest::Approx(std::log((2 + 2.0 / 3) / (3 + 2))).epsilon(1e-8));
}

TEST_CASE("deterministic cache limit drives entropy to zero") {
  LmParams p;
  p.lambda = 1e-12;
  p.alpha = 1e-12;
  auto lm = train_on({{0, 1, 2}}, 3, p);
  std::vector<TokenId> window(10, 1);
  auto r = lm.predict(window, 1);
  CHECK(std::exp(r.log_prob) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.entropy == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.correct);
}

TEST_CASE("predictive distribution normalizes on random contexts (property)") {
  std::mt19937_64 rng(5);
  const std::size_t v = 40;
  auto lm = train_on({testing::random_tokens(rng, 3000, v), testing::random_tokens(rng, 500, v / 2)}, v, LmParams{});
  for (int trial = 0; trial < 300; ++trial) {
    auto ctx = testing::random_tokens(rng, rng() % 200, v);
    auto d = lm.distribution(ctx);
    CHECK(std::abs(sum(d) - 1.0) <= 1e-9);
    for (double x : d) CHECK(x > 0.0);
  }
}

TEST_CASE("n_lm = 1 matches the direct count formulas on every window of a toy corpus") {
  const std::vector<TokenId> corpus = {0, 2, 0, 1, 0};
  const std::size_t v = 4;  // id 3 never occurs
  for (double lambda : {0.3, 0.7}) {
    LmParams p;
    p.n_lm = 1;
    p.n_cache = 1;
    p.lambda = lambda;
    p.alpha = 0.5;
    auto lm = train_on({corpus}, v, p);
    for (std::size_t b = 0; b <= corpus.size(); ++b)
      for (std::size_t e = b; e <= corpus.size(); ++e) {
        std::vector<TokenId> ctx(corpus.begin() + b, corpus.begin() + e);
        auto d = lm.distribution(ctx);
        for (TokenId w = 0; w < v; ++w) CHECK(std::abs(d[w] - brute_unigram(corpus, v, lambda, 0.5, ctx, w)) <= 1e-12);
      }
  }
}

TEST_CASE("cache probability never drops when the target gains an occurrence (property)") {
  std::mt19937_64 rng(17);
  const std::size_t v = 12;
  for (int n_cache : {1, 2, 3}) {
    LmParams p;
    p.n_lm = 3;
    p.n_cache = n_cache;
    auto lm = train_on({{0, 1, 2}}, v, p);
    const auto hlen = static_cast<std::size_t>(n_cache - 1);
    for (int trial = 0; trial < 300; ++trial) {
      auto window = testing::random_tokens(rng, hlen + 1 + rng() % 60, v);
      const auto target = static_cast<TokenId>(rng() % v);
      std::vector<TokenId> history(window.end() - static_cast<std::ptrdiff_t>(hlen), window.end());
      if (std::find(history.begin(), history.end(), target) != history.end()) continue;
      // One more occurrence of the target in the same continuation context,
      // placed at the front so the window's history is untouched.
      std::vector<TokenId> grown = history;
      grown.push_back(target);
      grown.insert(grown.end(), window.begin(), window.end());
      const double before = lm.cache_distribution(window)[target];
      const double after = lm.cache_distribution(grown)[target];
      bool had_continuation = hlen == 0;
      for (std::size_t j = 0; j + hlen < window.size() && !had_continuation; ++j)
        had_continuation = std::equal(history.begin(), history.end(), window.begin() + static_cast<std::ptrdiff_t>(j));
      if (had_continuation) CHECK(after >= before);
    }
  }
}

TEST_CASE("correct flag agrees with max_prob == p(target) (property)") {
  std::mt19937_64 rng(23);
  const std::size_t v = 8;
  auto lm = train_on({testing::random_tokens(rng, 400, v)}, v, LmParams{});
  std::size_t correct = 0;
  for (int trial = 0; trial < 400; ++trial) {
    auto ctx = testing::random_tokens(rng, rng() % 50, v);
    auto target = static_cast<TokenId>(rng() % v);
    auto r = lm.predict(ctx, target);
    CHECK(r.correct == (std::abs(r.max_prob - std::exp(r.log_prob)) <= 1e-12));
    // exp(log p) may land one ulp above the stored probability.
    CHECK(r.max_prob >= std::exp(r.log_prob) * (1 - 1e-15));
    CHECK(r.entropy >= 0.0);
    CHECK(r.entropy <= std::log(static_cast<double>(v)) + 1e-12);
    correct += r.correct;
    // Provider determinism.
    CHECK(lm.predict(ctx, target) == r);
  }
  CHECK(correct > 0);
}

TEST_CASE("training and prediction errors") {
  CHECK_THROWS_AS(CacheNGramLM::train({}, 3, LmParams{}), Error);
  CHECK_THROWS_AS(train_on({{}}, 3, LmParams{}), Error);
  LmParams p;
  p.n_cache = 4;
  CHECK_THROWS_AS(train_on({{0}}, 3, p), ConfigError);
  p = LmParams{};
  p.lambda = 1.0;
  CHECK_THROWS_AS(train_on({{0}}, 3, p), ConfigError);
  p = LmParams{};
  p.alpha = 0.0;
  CHECK_THROWS_AS(train_on({{0}}, 3, p), ConfigError);
  auto lm = train_on({{0, 1}}, 3, LmParams{});
  CHECK_THROWS_AS(lm.predict({}, 3), Error);
  CHECK_THROWS_AS(lm.predict(std::vector<TokenId>{7}, 0), Error);
}

TEST_CASE("model artifact round-trip") {
  testing::TempDir dir("lm");
  std::mt19937_64 rng(3);
  const std::size_t v = 20;
  auto lm = train_on({testing::random_tokens(rng, 800, v)}, v, LmParams{});
  lm.save(dir / "m.lm", "fp1");
  auto back = CacheNGramLM::load(dir / "m.lm", "fp1");
  CHECK(back.params().lambda == lm.params().lambda);
  for (int trial = 0; trial < 100; ++trial) {
    auto ctx = testing::random_tokens(rng, rng() % 40, v);
    auto t = static_cast<TokenId>(rng() % v);
    CHECK(back.predict(ctx, t) == lm.predict(ctx, t));
  }
  back.save(dir / "again.lm", "fp1");
  CHECK(testing::read_file(dir / "again.lm") == testing::read_file(dir / "m.lm"));
  CHECK_THROWS_AS(CacheNGramLM::load(dir / "m.lm", "other"), ValidationError);
  testing::write_file(dir / "junk.lm", "hello\n");
  CHECK_THROWS_AS(CacheNGramLM::load(dir / "junk.lm", "fp1"), ValidationError);
}
