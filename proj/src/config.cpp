#include "ctxprobe/config.hpp"

#include <algorithm>
#include <fstream>

#include "ctxprobe/error.hpp"
#include "ctxprobe/hash.hpp"

namespace ctxprobe {
namespace {

using nlohmann::json;

std::vector<std::filesystem::path> path_list(const json& j, const char* key) {
  std::vector<std::filesystem::path> out;
  const auto& v = j.at(key);
  if (v.is_string()) {
    out.emplace_back(v.get<std::string>());
  } else {
    for (const auto& p : v) out.emplace_back(p.get<std::string>());
  }
  return out;
}

json path_list_json(const std::vector<std::filesystem::path>& paths) {
  json out = json::array();
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

const std::vector<std::string> kKnownKeys = {
    "corpus",  "vocab",   "tags",         "provider",         "train_corpus", "model",       "n_lm",
    "lambda",  "alpha",   "n_cache",      "context_lens",     "stride_divisor", "strides",   "ngram_n",
    "ngram_range", "frequency_corpus", "output", "epsilon",   "seed",         "workers",     "extra_breakpoint"};

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
      throw ConfigError("unknown configuration key '" + key + "'");
  RunConfig c;
  try {
    if (j.contains("corpus")) c.corpus = path_list(j, "corpus");
    if (j.contains("vocab")) c.vocab = j.at("vocab").get<std::string>();
    if (j.contains("tags") && !j.at("tags").is_null()) c.tags = j.at("tags").get<std::string>();
    if (j.contains("provider")) c.provider = j.at("provider").get<std::string>();
    if (j.contains("train_corpus")) c.train_corpus = path_list(j, "train_corpus");
    if (j.contains("model") && !j.at("model").is_null()) c.model = j.at("model").get<std::string>();
    if (j.contains("n_lm")) c.lm.n_lm = j.at("n_lm").get<int>();
    if (j.contains("lambda")) c.lm.lambda = j.at("lambda").get<double>();
    if (j.contains("alpha")) c.lm.alpha = j.at("alpha").get<double>();
    if (j.contains("n_cache")) c.lm.n_cache = j.at("n_cache").get<int>();
    if (j.contains("context_lens")) c.context_lens = j.at("context_lens").get<std::vector<std::size_t>>();
    if (j.contains("stride_divisor")) c.stride_divisor = j.at("stride_divisor").get<std::size_t>();
    if (j.contains("strides"))
      for (const auto& [k, s] : j.at("strides").items()) c.strides[std::stoul(k)] = s.get<std::size_t>();
    if (j.contains("ngram_n")) c.ngram_n = j.at("ngram_n").get<std::size_t>();
    if (j.contains("ngram_range")) {
      auto r = j.at("ngram_range").get<std::vector<std::size_t>>();
      if (r.size() != 2) throw ConfigError("ngram_range must be [lo, hi]");
      c.ngram_lo = r[0];
      c.ngram_hi = r[1];
    }
    if (j.contains("frequency_corpus")) c.frequency_corpus = path_list(j, "frequency_corpus");
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    if (j.contains("extra_breakpoint") && !j.at("extra_breakpoint").is_null())
      c.extra_breakpoint = j.at("extra_breakpoint").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("malformed configuration: stride keys must be integers");
  }
  if (c.train_corpus.empty()) c.train_corpus = c.corpus;
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const json& overrides) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file " + path.string());
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw ConfigError("configuration file " + path.string() + " is not valid JSON: " + e.what());
    }
  }
  if (!overrides.is_null())
    for (const auto& [key, value] : overrides.items()) j[key] = value;
  return from_json(j);
}

json RunConfig::to_json() const {
  json j;
  j["corpus"] = path_list_json(corpus);
  j["vocab"] = vocab.string();
  j["tags"] = tags ? json(tags->string()) : json(nullptr);
  j["provider"] = provider;
  j["train_corpus"] = path_list_json(train_corpus);
  j["model"] = model ? json(model->string()) : json(nullptr);
  j["n_lm"] = lm.n_lm;
  j["lambda"] = lm.lambda;
  j["alpha"] = lm.alpha;
  j["n_cache"] = lm.n_cache;
  j["context_lens"] = context_lens;
  j["stride_divisor"] = stride_divisor;
  json s = json::object();
  for (const auto& [k, v] : strides) s[std::to_string(k)] = v;
  j["strides"] = s;
  j["ngram_n"] = ngram_n;
  j["ngram_range"] = {ngram_lo, ngram_hi};
  j["frequency_corpus"] = path_list_json(frequency_corpus);
  j["output"] = output.string();
  j["epsilon"] = epsilon;
  j["seed"] = seed;
  j["workers"] = workers;
  j["extra_breakpoint"] = extra_breakpoint ? json(*extra_breakpoint) : json(nullptr);
  return j;
}

std::filesystem::path RunConfig::provider_path() const {
  if (provider.rfind("file:", 0) != 0) throw ConfigError("provider '" + provider + "' is not file-backed");
  return provider.substr(5);
}

SweepConfig RunConfig::sweep_config() const {
  auto sc = SweepConfig::with_stride_divisor(context_lens, stride_divisor);
  for (const auto& [k, s] : strides) {
    if (!sc.stride.count(k)) throw ConfigError("stride given for K=" + std::to_string(k) + " which is not a tier");
    sc.stride[k] = s;
  }
  sc.validate();
  return sc;
}

void RunConfig::validate() const {
  namespace fs = std::filesystem;
  auto require = [](const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw ConfigError(what + " path does not exist: " + p.string());
  };
  if (corpus.empty()) throw ConfigError("no corpus paths configured");
  for (const auto& p : corpus) require(p, "corpus");
  if (vocab.empty()) throw ConfigError("no vocabulary configured");
  require(vocab, "vocabulary");
  if (tags) require(*tags, "tag file");
  for (const auto& p : train_corpus) require(p, "training corpus");
  for (const auto& p : frequency_corpus) require(p, "frequency corpus");
  if (!builtin_provider()) {
    if (provider.rfind("file:", 0) != 0) throw ConfigError("provider must be 'builtin' or 'file:<path>'");
    require(provider_path(), "record store");
  }
  lm.validate();
  if (context_lens.empty()) throw ConfigError("context_lens must not be empty");
  for (std::size_t i = 1; i < context_lens.size(); ++i)
    if (context_lens[i - 1] >= context_lens[i]) throw ConfigError("context_lens must be strictly ascending");
  sweep_config();
  const auto min_k = context_lens.front();
  if (ngram_n < 1 || ngram_n > min_k) throw ConfigError("ngram_n must lie in [1, min(context_lens)]");
  if (ngram_lo < 1 || ngram_lo > ngram_hi || ngram_hi > min_k)
    throw ConfigError("ngram_range must satisfy 1 <= lo <= hi <= min(context_lens)");
  if (epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (extra_breakpoint && !(*extra_breakpoint > 1.0)) throw ConfigError("extra_breakpoint must exceed 1");
}

std::string RunConfig::hash() const {
  auto j = to_json();
  j.erase("output");
  j.erase("workers");
  j.erase("model");
  return fnv1a_hex(j.dump());
}

}  // namespace ctxprobe
