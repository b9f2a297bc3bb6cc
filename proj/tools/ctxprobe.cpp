// Command-line front end: train, sweep, analyze, frequency, gen-corpus.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "ctxprobe/commands.hpp"
#include "ctxprobe/error.hpp"
#include "ctxprobe/synth.hpp"

namespace {

using nlohmann::json;

// Flags collected as optionals so only the ones given override the config file.
struct Flags {
  std::string config;
  std::vector<std::string> corpus, train_corpus, frequency_corpus, strides;
  std::optional<std::string> vocab, tags, provider, model, output;
  std::optional<int> n_lm, n_cache;
  std::optional<double> lambda, alpha, epsilon, extra_breakpoint;
  std::vector<std::size_t> context_lens, ngram_range;
  std::optional<std::size_t> stride_divisor, ngram_n, workers;
  std::optional<std::uint64_t> seed;

  json overrides() const {
    json j = json::object();
    if (!corpus.empty()) j["corpus"] = corpus;
    if (!train_corpus.empty()) j["train_corpus"] = train_corpus;
    if (!frequency_corpus.empty()) j["frequency_corpus"] = frequency_corpus;
    if (vocab) j["vocab"] = *vocab;
    if (tags) j["tags"] = *tags;
    if (provider) j["provider"] = *provider;
    if (model) j["model"] = *model;
    if (output) j["output"] = *output;
    if (n_lm) j["n_lm"] = *n_lm;
    if (n_cache) j["n_cache"] = *n_cache;
    if (lambda) j["lambda"] = *lambda;
    if (alpha) j["alpha"] = *alpha;
    if (epsilon) j["epsilon"] = *epsilon;
    if (extra_breakpoint) j["extra_breakpoint"] = *extra_breakpoint;
    if (!context_lens.empty()) j["context_lens"] = context_lens;
    if (!ngram_range.empty()) j["ngram_range"] = ngram_range;
    if (stride_divisor) j["stride_divisor"] = *stride_divisor;
    if (ngram_n) j["ngram_n"] = *ngram_n;
    if (workers) j["workers"] = *workers;
    if (seed) j["seed"] = *seed;
    if (!strides.empty()) {
      json s = json::object();
      for (const auto& kv : strides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ctxprobe::ConfigError("--stride expects K=S, got '" + kv + "'");
        try {
          s[kv.substr(0, eq)] = std::stoul(kv.substr(eq + 1));
        } catch (const std::exception&) {
          throw ctxprobe::ConfigError("--stride expects K=S, got '" + kv + "'");
        }
      }
      j["strides"] = s;
    }
    return j;
  }
};

void add_config_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON configuration file");
  app.add_option("--corpus", f.corpus, "Evaluation documents (files or directories)");
  app.add_option("--vocab", f.vocab, "Vocabulary file, one token per line");
  app.add_option("--tags", f.tags, "Tag file: word<TAB>tag lines, blank line between documents");
  app.add_option("--provider", f.provider, "'builtin' or 'file:<path>'");
  app.add_option("--train-corpus", f.train_corpus, "Training documents for the built-in LM");
  app.add_option("--model", f.model, "Model artifact path");
  app.add_option("--n-lm", f.n_lm, "Backoff n-gram order");
  app.add_option("--lambda", f.lambda, "Weight of the backoff model in the interpolation");
  app.add_option("--alpha", f.alpha, "Additive smoothing for the cache");
  app.add_option("--n-cache", f.n_cache, "Cache n-gram order");
  app.add_option("--context-lens", f.context_lens, "Context-length tiers K, ascending");
  app.add_option("--stride-divisor", f.stride_divisor, "Stride S = max(1, K / divisor)");
  app.add_option("--stride", f.strides, "Per-tier stride override K=S (repeatable)");
  app.add_option("--ngram-n", f.ngram_n, "N for the n-gram analysis");
  app.add_option("--ngram-range", f.ngram_range, "lo hi for the n-gram sweep")->expected(2);
  app.add_option("--frequency-corpus", f.frequency_corpus, "Corpus for token frequency counts");
  app.add_option("--output", f.output, "Output directory");
  app.add_option("--epsilon", f.epsilon, "Threshold for counting a change as increase or decrease");
  app.add_option("--seed", f.seed, "Seed recorded with the run");
  app.add_option("--workers", f.workers, "Worker threads");
  app.add_option("--extra-breakpoint", f.extra_breakpoint, "Split group C at this ratio");
}

int run(int argc, char** argv) {
  CLI::App app{"Measure how token predictions change with context length"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  add_config_flags(app, flags);

  auto* train = app.add_subcommand("train", "Train the built-in language model");
  auto* sweep = app.add_subcommand("sweep", "Score every document at every context-length tier");
  bool force = false;
  sweep->add_flag("--force", force, "Overwrite existing sweep outputs");
  auto* analyze = app.add_subcommand("analyze", "Run an analysis over sweep outputs");
  std::string analysis;
  analyze->add_option("analysis", analysis, "ratios, pos, subword, ngram, ngram-sweep, frequency, confidence or all")
      ->required();
  auto* frequency = app.add_subcommand("frequency", "Count token frequencies over the frequency corpus");

  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic corpus with vocabulary and tags");
  ctxprobe::SynthConfig synth;
  std::string gen_out;
  gen->add_option("--out", gen_out, "Destination directory")->required();
  gen->add_option("--seed", synth.seed, "Document seed");
  gen->add_option("--docs", synth.num_docs, "Number of documents");
  gen->add_option("--words", synth.words_per_doc, "Words per document");
  gen->add_option("--motif-rate", synth.motif_rate, "Probability of a motif per sentence slot");
  gen->add_option("--topic-rate", synth.topic_rate, "Probability of a topic noun per noun slot");
  gen->add_option("--lexicon", synth.lexicon_per_class, "Open-class words per class");
  gen->add_option("--topic-words", synth.topic_words_per_doc, "Topic nouns per document");
  gen->add_option("--motifs", synth.motifs_per_doc, "Recurring motifs per document");
  gen->add_option("--prefix", synth.doc_prefix, "Document id prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      ctxprobe::write_corpus(gen_out, ctxprobe::generate_corpus(synth));
      return 0;
    }
    const auto config = ctxprobe::RunConfig::load(flags.config, flags.overrides());
    if (train->parsed()) ctxprobe::cmd_train(config);
    if (sweep->parsed()) ctxprobe::cmd_sweep(config, force);
    if (frequency->parsed()) ctxprobe::cmd_frequency(config);
    if (analyze->parsed()) ctxprobe::cmd_analyze(config, analysis);
  } catch (const ctxprobe::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
