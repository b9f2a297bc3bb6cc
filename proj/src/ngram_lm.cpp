#include "ctxprobe/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ctxprobe/error.hpp"

namespace ctxprobe {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

DistributionSummary summarize_distribution(std::span<const double> probs, TokenId target) {
  if (target >= probs.size()) throw Error("target id " + std::to_string(target) + " outside vocabulary");
  double entropy = 0.0;
  double max_prob = -1.0;
  TokenId argmax = 0;
  for (std::size_t w = 0; w < probs.size(); ++w) {
    const double p = probs[w];
    if (p > 0.0) entropy -= p * std::log(p);
    if (p > max_prob) {
      max_prob = p;
      argmax = static_cast<TokenId>(w);
    }
  }
  if (probs[target] == max_prob) argmax = target;
  return {std::log(probs[target]), entropy, max_prob, argmax, argmax == target};
}

void LmParams::validate() const {
  if (n_lm < 1) throw ConfigError("n_lm must be >= 1");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie strictly between 0 and 1");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (n_cache < 1) throw ConfigError("n_cache must be >= 1");
  if (n_cache > n_lm) throw ConfigError("n_cache must not exceed n_lm");
}

CacheNGramLM CacheNGramLM::train(std::span<const Document> corpus, std::size_t vocab_size, const LmParams& params) {
  params.validate();
  if (vocab_size == 0) throw Error("cannot train on an empty vocabulary");
  CacheNGramLM lm;
  lm.params_ = params;
  lm.vocab_size_ = vocab_size;
  lm.counts_.resize(static_cast<std::size_t>(params.n_lm));

  std::size_t seen = 0;
  for (const auto& doc : corpus) {
    const auto& toks = doc.tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i] >= vocab_size) throw Error("token id outside vocabulary in document " + doc.doc_id);
      for (int order = 1; order <= params.n_lm; ++order) {
        const auto hlen = static_cast<std::size_t>(order - 1);
        if (i < hlen) break;
        History h(toks.begin() + static_cast<std::ptrdiff_t>(i - hlen), toks.begin() + static_cast<std::ptrdiff_t>(i));
        auto& succ = lm.counts_[hlen][std::move(h)];
        ++succ.total;
        ++succ.counts[toks[i]];
      }
      ++seen;
    }
  }
  if (seen == 0) throw Error("cannot train on an empty corpus");
  return lm;
}

std::vector<double> CacheNGramLM::backoff_distribution(std::span<const TokenId> context) const {
  std::vector<double> dist(vocab_size_, 1.0 / static_cast<double>(vocab_size_));
  History h;
  for (int order = 1; order <= params_.n_lm; ++order) {
    const auto hlen = static_cast<std::size_t>(order - 1);
    if (context.size() < hlen) break;
    h.assign(context.end() - static_cast<std::ptrdiff_t>(hlen), context.end());
    const auto& table = counts_[hlen];
    auto it = table.find(h);
    if (it == table.end()) continue;
    const auto& succ = it->second;
    const double types = static_cast<double>(succ.counts.size());
    const double denom = static_cast<double>(succ.total) + types;
    for (auto& p : dist) p = types * p / denom;
    for (const auto& [w, c] : succ.counts) dist[w] += static_cast<double>(c) / denom;
  }
  return dist;
}

std::vector<double> CacheNGramLM::cache_distribution(std::span<const TokenId> window) const {
  const double alpha = params_.alpha;
  const double v = static_cast<double>(vocab_size_);
  std::vector<double> counts(vocab_size_, 0.0);
  const auto hlen = static_cast<std::size_t>(params_.n_cache - 1);

  std::size_t continuations = 0;
  if (window.size() > hlen) {
    auto history = window.last(hlen);
    for (std::size_t j = 0; j + hlen < window.size(); ++j) {
      if (std::equal(history.begin(), history.end(), window.begin() + static_cast<std::ptrdiff_t>(j))) {
        counts[window[j + hlen]] += 1.0;
        ++continuations;
      }
    }
  }

  double total = static_cast<double>(continuations);
  if (continuations == 0) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (TokenId t : window) counts[t] += 1.0;
    total = static_cast<double>(window.size());
  }
  const double denom = total + alpha * v;
  for (auto& c : counts) c = (c + alpha) / denom;
  return counts;
}

std::vector<double> CacheNGramLM::distribution(std::span<const TokenId> context) const {
  for (TokenId t : context)
    if (t >= vocab_size_) throw Error("context token id " + std::to_string(t) + " outside vocabulary");
  auto dist = backoff_distribution(context);
  const auto cache = cache_distribution(context);
  const double lambda = params_.lambda;
  for (std::size_t w = 0; w < dist.size(); ++w) dist[w] = lambda * dist[w] + (1.0 - lambda) * cache[w];
  return dist;
}

PredictionRecord CacheNGramLM::predict(std::span<const TokenId> context, TokenId target) const {
  if (target >= vocab_size_) throw Error("target id " + std::to_string(target) + " outside vocabulary");
  const auto dist = distribution(context);
  const auto s = summarize_distribution(dist, target);
  PredictionRecord r;
  r.context_len = context.size();
  r.log_prob = s.log_prob;
  r.entropy = s.entropy;
  r.max_prob = s.max_prob;
  r.argmax_id = s.argmax_id;
  r.correct = s.correct;
  return r;
}

PredictionRecord CacheNGramLM::score(const ScoreRequest& request) const {
  auto r = predict(request.context, request.target);
  r.doc_id = std::string(request.doc_id);
  r.token_index = request.token_index;
  return r;
}

void CacheNGramLM::save(const std::filesystem::path& path, const std::string& vocab_fingerprint) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model artifact " + path.string());
  out << "ctxprobe-lm 1\n";
  out << "vocab_fingerprint " << vocab_fingerprint << '\n';
  out << "vocab_size " << vocab_size_ << '\n';
  out << "n_lm " << params_.n_lm << '\n';
  out << "lambda " << format_double(params_.lambda) << '\n';
  out << "alpha " << format_double(params_.alpha) << '\n';
  out << "n_cache " << params_.n_cache << '\n';
  for (std::size_t o = 0; o < counts_.size(); ++o) {
    out << "order " << (o + 1) << ' ' << counts_[o].size() << '\n';
    for (const auto& [hist, succ] : counts_[o]) {
      if (hist.empty()) out << '-';
      for (std::size_t k = 0; k < hist.size(); ++k) out << (k ? " " : "") << hist[k];
      out << '\t';
      bool first = true;
      for (const auto& [w, c] : succ.counts) {
        out << (first ? "" : " ") << w << ':' << c;
        first = false;
      }
      out << '\n';
    }
  }
  if (!out) throw Error("failed writing model artifact " + path.string());
}

CacheNGramLM CacheNGramLM::load(const std::filesystem::path& path, const std::string& vocab_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read model artifact " + path.string());
  auto bad = [&](const std::string& what) { return ValidationError(path.string() + ": " + what); };

  std::string key, fingerprint;
  int version = 0;
  if (!(in >> key >> version) || key != "ctxprobe-lm" || version != 1) throw bad("not a ctxprobe model artifact");
  CacheNGramLM lm;
  auto expect = [&](const char* name) {
    if (!(in >> key) || key != name) throw bad(std::string("expected field ") + name);
  };
  expect("vocab_fingerprint");
  in >> fingerprint;
  if (fingerprint != vocab_fingerprint)
    throw bad("vocabulary fingerprint mismatch (artifact " + fingerprint + ", current " + vocab_fingerprint + ")");
  std::string lambda_s, alpha_s;
  expect("vocab_size");
  in >> lm.vocab_size_;
  expect("n_lm");
  in >> lm.params_.n_lm;
  expect("lambda");
  in >> lambda_s;
  expect("alpha");
  in >> alpha_s;
  expect("n_cache");
  in >> lm.params_.n_cache;
  if (!in) throw bad("truncated header");
  lm.params_.lambda = std::strtod(lambda_s.c_str(), nullptr);
  lm.params_.alpha = std::strtod(alpha_s.c_str(), nullptr);
  lm.params_.validate();

  lm.counts_.resize(static_cast<std::size_t>(lm.params_.n_lm));
  std::string line;
  std::getline(in, line);
  for (int o = 1; o <= lm.params_.n_lm; ++o) {
    std::size_t rows = 0;
    int order = 0;
    if (!std::getline(in, line)) throw bad("missing order block");
    std::istringstream hdr(line);
    if (!(hdr >> key >> order >> rows) || key != "order" || order != o) throw bad("malformed order header");
    auto& table = lm.counts_[static_cast<std::size_t>(o - 1)];
    for (std::size_t r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw bad("truncated counts");
      auto tab = line.find('\t');
      if (tab == std::string::npos) throw bad("malformed counts row");
      History hist;
      std::istringstream hs(line.substr(0, tab));
      std::string tok;
      while (hs >> tok)
        if (tok != "-") hist.push_back(static_cast<TokenId>(std::stoul(tok)));
      if (hist.size() != static_cast<std::size_t>(o - 1)) throw bad("history length does not match order");
      Successors succ;
      std::istringstream cs(line.substr(tab + 1));
      while (cs >> tok) {
        auto colon = tok.find(':');
        if (colon == std::string::npos) throw bad("malformed successor count");
        auto w = static_cast<TokenId>(std::stoul(tok.substr(0, colon)));
        auto c = static_cast<std::uint64_t>(std::stoull(tok.substr(colon + 1)));
        if (w >= lm.vocab_size_) throw bad("successor id outside vocabulary");
        succ.counts[w] = c;
        succ.total += c;
      }
      table.emplace(std::move(hist), std::move(succ));
    }
  }
  return lm;
}

}  // namespace ctxprobe
