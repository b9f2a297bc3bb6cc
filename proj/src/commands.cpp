#include "ctxprobe/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>

#include "ctxprobe/annotate.hpp"
#include "ctxprobe/error.hpp"
#include "ctxprobe/hash.hpp"
#include "ctxprobe/ngram_lm.hpp"
#include "ctxprobe/parallel.hpp"
#include "ctxprobe/record_store.hpp"
#include "ctxprobe/sweep.hpp"

namespace ctxprobe {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void extend_vocab(Vocabulary& vocab, const std::vector<fs::path>& paths) {
  for (const auto& file : expand_paths(paths)) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot read " + file.string());
    std::string line;
    while (std::getline(in, line)) vocab.add_fallback_chars(line);
  }
}

std::unique_ptr<LogProbProvider> open_provider(const Workspace& ws) {
  if (ws.config.builtin_provider()) {
    const auto path = ws.config.model_path();
    if (!fs::exists(path)) throw Error("model artifact " + path.string() + " not found; run `ctxprobe train` first");
    auto lm = CacheNGramLM::load(path, ws.vocab.fingerprint());
    if (lm.vocab_size() != ws.vocab.size()) throw ValidationError("model vocabulary size disagrees with vocabulary");
    return std::make_unique<CacheNGramLM>(std::move(lm));
  }
  return std::make_unique<RecordStore>(open_record_store(ws.config.provider_path()));
}

class ReportWriter {
 public:
  ReportWriter(fs::path dir, std::string config_hash) : dir_(std::move(dir)), hash_(std::move(config_hash)) {
    fs::create_directories(dir_);
  }

  void write(std::string_view name, const std::vector<std::string>& header,
             const std::vector<std::vector<std::string>>& rows, const ordered_json& results) const {
    {
      std::ofstream csv(dir_ / (std::string(name) + ".csv"), std::ios::binary);
      csv << "# config_hash: " << hash_ << '\n';
      auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) csv << (i ? "," : "") << cells[i];
        csv << '\n';
      };
      line(header);
      for (const auto& r : rows) line(r);
      if (!csv) throw Error("failed writing report " + std::string(name));
    }
    ordered_json summary;
    summary["analysis"] = name;
    summary["config_hash"] = hash_;
    summary["results"] = results;
    std::ofstream js(dir_ / (std::string(name) + ".json"), std::ios::binary);
    js << summary.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::string hash_;
};

ordered_json correlation_json(std::size_t k, std::optional<std::size_t> n_gram, const CorrelationResult& r) {
  ordered_json e;
  e["K"] = k;
  e["N"] = n_gram ? ordered_json(*n_gram) : ordered_json(nullptr);
  e["statistic"] = {{"rho", r.rho}, {"significant", r.significant}};
  e["p_value"] = r.p_value;
  e["n"] = r.n;
  return e;
}

std::vector<std::string> correlation_cells(const CorrelationResult& r) {
  return {num(r.rho), num(r.p_value), std::to_string(r.n), r.significant ? "true" : "false"};
}

// Sweep outputs regrouped by document and tier.
struct LoadedSweeps {
  std::map<std::pair<std::size_t, std::size_t>, SweepResult> by_doc_tier;
  std::vector<std::string> warnings;

  const SweepResult* find(std::size_t doc, std::size_t k) const {
    auto it = by_doc_tier.find({doc, k});
    return it == by_doc_tier.end() ? nullptr : &it->second;
  }
};

LoadedSweeps load_sweeps(const Workspace& ws) {
  const auto dir = ws.config.output / "sweeps";
  if (!fs::is_directory(dir)) throw Error("no sweep outputs under " + dir.string() + "; run `ctxprobe sweep` first");
  auto store = open_record_store(dir);
  const auto expected = ws.sweep_hash();
  for (const auto& h : store.config_hashes())
    if (h != expected)
      throw Error("sweep outputs in " + dir.string() + " were produced by a different configuration (" + h +
                  " vs " + expected + "); rerun `ctxprobe sweep --force`");

  LoadedSweeps out;
  const auto max_k = ws.config.context_lens.back();
  for (std::size_t d = 0; d < ws.docs.size(); ++d) {
    const auto& doc = ws.docs[d];
    if (doc.size() < max_k) {
      out.warnings.push_back("document " + doc.doc_id + " (" + std::to_string(doc.size()) +
                             " tokens) is shorter than max K; skipped");
      continue;
    }
    for (auto k : ws.config.context_lens) {
      if (!store.contains(doc.doc_id, k, 0))
        throw Error("missing sweep output for document " + doc.doc_id + " at tier K=" + std::to_string(k) +
                    "; run `ctxprobe sweep` with this tier");
      SweepResult r;
      r.doc_id = doc.doc_id;
      r.k = k;
      r.stride = ws.config.sweep_config().stride_for(k);
      r.records.reserve(doc.size());
      for (std::size_t i = 0; i < doc.size(); ++i) r.records.push_back(store.lookup(doc.doc_id, k, i));
      r.ppl = mean_token_perplexity(r.records);
      out.by_doc_tier.emplace(std::make_pair(d, k), std::move(r));
    }
  }
  return out;
}

struct TierPairs {
  std::size_t k = 0;
  std::vector<PairedComparison> pairs;
};

std::vector<TierPairs> build_pairs(const Workspace& ws, const LoadedSweeps& sweeps, std::vector<std::string>& warnings) {
  std::vector<TierPairs> out;
  for (const auto& [k, k2] : ws.config.sweep_config().comparison_pairs) {
    TierPairs tp;
    tp.k = k;
    for (std::size_t d = 0; d < ws.docs.size(); ++d) {
      const auto& doc = ws.docs[d];
      const auto* a = sweeps.find(d, k);
      const auto* b = sweeps.find(d, k2);
      if (!a || !b) continue;
      if (doc.size() < 2 * k) {
        warnings.push_back("document " + doc.doc_id + " shorter than 2K=" + std::to_string(2 * k) +
                           "; skipped for pair (" + std::to_string(k) + ", " + std::to_string(k2) + ")");
        continue;
      }
      auto pairs = align_comparisons(*a, *b, doc);
      annotate_ngrams(pairs, doc, ws.config.ngram_n);
      tp.pairs.insert(tp.pairs.end(), pairs.begin(), pairs.end());
    }
    out.push_back(std::move(tp));
  }
  return out;
}

const Document& doc_by_id(const Workspace& ws, const std::string& id) {
  for (const auto& d : ws.docs)
    if (d.doc_id == id) return d;
  throw Error("unknown document " + id);
}

void analyze_one(std::string_view name, const Workspace& ws, const LoadedSweeps& sweeps,
                 std::vector<TierPairs>& tiers, const std::optional<FrequencyTable>& freq, const ReportWriter& out) {
  const auto& cfg = ws.config;
  std::vector<std::vector<std::string>> rows;
  ordered_json results = ordered_json::array();

  if (tiers.empty() && name != "confidence")
    throw ConfigError("analysis '" + std::string(name) + "' needs at least one (K, 2K) tier pair in context_lens");

  if (name == "ratios") {
    std::vector<std::string> header = {"metric"};
    std::vector<std::string> dec = {"decrease"}, inc = {"increase"}, same = {"unchanged"}, count = {"n"};
    for (const auto& t : tiers) {
      header.push_back("K=" + std::to_string(t.k));
      if (t.pairs.empty()) {
        for (auto* row : {&dec, &inc, &same, &count}) row->push_back("");
        continue;
      }
      const auto r = decrease_increase_ratios(t.pairs, cfg.epsilon);
      dec.push_back(num(r.decrease));
      inc.push_back(num(r.increase));
      same.push_back(num(r.unchanged));
      count.push_back(std::to_string(r.n));
      ordered_json e;
      e["K"] = t.k;
      e["N"] = nullptr;
      e["statistic"] = {{"decrease", r.decrease}, {"increase", r.increase}, {"unchanged", r.unchanged}};
      e["p_value"] = nullptr;
      e["n"] = r.n;
      results.push_back(e);
    }
    out.write(name, header, {dec, inc, same, count}, results);
    return;
  }

  if (name == "pos") {
    for (const auto& t : tiers) {
      for (const auto& [cls, m] : pos_class_decrements(t.pairs)) {
        rows.push_back({std::to_string(t.k), std::string(to_string(cls)), num(m.mean), std::to_string(m.n)});
        ordered_json e;
        e["K"] = t.k;
        e["N"] = nullptr;
        e["statistic"] = {{"class", to_string(cls)}, {"mean_decrement", m.mean}};
        e["p_value"] = nullptr;
        e["n"] = m.n;
        results.push_back(e);
      }
    }
    out.write(name, {"k", "class", "mean_decrement", "n"}, rows, results);
    return;
  }

  if (name == "subword") {
    for (const auto& t : tiers) {
      const auto r = delta_d(t.pairs, true);
      auto emit = [&](const std::string& stratum, const DeltaDStratum& s) {
        rows.push_back({std::to_string(t.k), stratum, num(s.delta_d), num(s.first.mean), std::to_string(s.first.n),
                        num(s.latter.mean), std::to_string(s.latter.n)});
        ordered_json e;
        e["K"] = t.k;
        e["N"] = nullptr;
        e["statistic"] = {{"stratum", stratum}, {"delta_d", s.delta_d}, {"mean_first", s.first.mean},
                          {"mean_latter", s.latter.mean}};
        e["p_value"] = nullptr;
        e["n"] = s.first.n + s.latter.n;
        results.push_back(e);
      };
      if (r.overall) emit("overall", *r.overall);
      for (const auto& [cls, s] : r.by_class) emit(std::string(to_string(cls)), s);
    }
    out.write(name, {"k", "stratum", "delta_d", "mean_first", "n_first", "mean_latter", "n_latter"}, rows, results);
    return;
  }

  if (name == "ngram") {
    for (const auto& t : tiers) {
      const auto r = ngram_correlation(t.pairs);
      auto cells = correlation_cells(r);
      cells.insert(cells.begin(), {std::to_string(t.k), std::to_string(cfg.ngram_n)});
      rows.push_back(cells);
      results.push_back(correlation_json(t.k, cfg.ngram_n, r));
    }
    out.write(name, {"k", "n_gram", "rho", "p_value", "n", "significant"}, rows, results);
    return;
  }

  if (name == "ngram-sweep") {
    for (auto& t : tiers) {
      const auto points = ngram_sweep(t.pairs, ws.docs, cfg.ngram_lo, cfg.ngram_hi);
      for (const auto& pt : points) {
        if (pt.result) {
          auto cells = correlation_cells(*pt.result);
          cells.insert(cells.begin(), {std::to_string(t.k), std::to_string(pt.n)});
          cells.push_back("");
          rows.push_back(cells);
          results.push_back(correlation_json(t.k, pt.n, *pt.result));
        } else {
          rows.push_back({std::to_string(t.k), std::to_string(pt.n), "", "", std::to_string(t.pairs.size()), "false",
                          pt.note});
        }
      }
      // Restore the configured order for any later analysis.
      for (std::size_t b = 0; b < t.pairs.size();) {
        std::size_t e = b;
        while (e < t.pairs.size() && t.pairs[e].doc_id == t.pairs[b].doc_id) ++e;
        annotate_ngrams(std::span(t.pairs).subspan(b, e - b), doc_by_id(ws, t.pairs[b].doc_id), cfg.ngram_n);
        b = e;
      }
    }
    out.write(name, {"k", "n_gram", "rho", "p_value", "n", "significant", "note"}, rows, results);
    return;
  }

  if (name == "frequency") {
    if (!freq) throw ConfigError("frequency analysis needs frequency_corpus");
    for (auto& t : tiers) {
      for (std::size_t b = 0; b < t.pairs.size();) {
        std::size_t e = b;
        while (e < t.pairs.size() && t.pairs[e].doc_id == t.pairs[b].doc_id) ++e;
        annotate_frequency(std::span(t.pairs).subspan(b, e - b), doc_by_id(ws, t.pairs[b].doc_id), *freq);
        b = e;
      }
      for (const auto& g : grouped_frequency_correlation(t.pairs, cfg.extra_breakpoint)) {
        if (g.result) {
          auto cells = correlation_cells(*g.result);
          cells.insert(cells.begin(), {std::to_string(t.k), g.name, g.rule});
          cells.push_back("");
          rows.push_back(cells);
          auto e = correlation_json(t.k, cfg.ngram_n, *g.result);
          e["statistic"]["group"] = g.name;
          e["statistic"]["rule"] = g.rule;
          results.push_back(e);
        } else {
          rows.push_back({std::to_string(t.k), g.name, g.rule, "", "", std::to_string(g.n), "false", g.note});
        }
      }
    }
    out.write(name, {"k", "group", "rule", "rho", "p_value", "n", "significant", "note"}, rows, results);
    return;
  }

  if (name == "confidence") {
    std::vector<SweepResult> all;
    for (const auto& [key, r] : sweeps.by_doc_tier) all.push_back(r);
    for (const auto& [k, tier] : confidence_stats(all)) {
      for (const auto& [group, g] : {std::pair{"T", tier.correct}, std::pair{"F", tier.incorrect}}) {
        if (!g) continue;
        rows.push_back({std::to_string(k), group, num(g->mean_entropy), num(g->mean_max_prob), std::to_string(g->n)});
        ordered_json e;
        e["K"] = k;
        e["N"] = nullptr;
        e["statistic"] = {{"group", group}, {"mean_entropy", g->mean_entropy}, {"mean_max_prob", g->mean_max_prob}};
        e["p_value"] = nullptr;
        e["n"] = g->n;
        results.push_back(e);
      }
    }
    out.write(name, {"k", "group", "mean_entropy", "mean_max_prob", "n"}, rows, results);
    return;
  }

  throw ConfigError("unknown analysis '" + std::string(name) + "'");
}

}  // namespace

bool is_analysis(std::string_view name) {
  return std::find(std::begin(kAnalyses), std::end(kAnalyses), name) != std::end(kAnalyses);
}

Workspace Workspace::open(const RunConfig& config) {
  config.validate();
  Workspace ws;
  ws.config = config;
  ws.vocab = Vocabulary::load(config.vocab);
  extend_vocab(ws.vocab, config.corpus);
  extend_vocab(ws.vocab, config.train_corpus);
  extend_vocab(ws.vocab, config.frequency_corpus);

  const auto sources = read_sources(config.corpus);
  std::optional<std::vector<std::vector<TaggedWord>>> tags;
  if (config.tags) {
    tags = read_tag_file(*config.tags);
    if (tags->size() != sources.size())
      throw ConfigError("tag file has " + std::to_string(tags->size()) + " documents, corpus has " +
                        std::to_string(sources.size()));
  }
  for (std::size_t d = 0; d < sources.size(); ++d) {
    auto doc = tokenize(sources[d].text, ws.vocab, sources[d].doc_id);
    if (tags)
      attach_pos_tags(doc, (*tags)[d], &ws.unknown_tags);
    else
      attach_fallback_tags(doc);
    ws.docs.push_back(std::move(doc));
  }
  if (ws.unknown_tags) ws.warnings.push_back(std::to_string(ws.unknown_tags) + " unknown POS tags mapped to 'other'");
  if (!config.tags) ws.warnings.push_back("no tag file configured; POS classes come from the built-in fallback tagger");
  return ws;
}

std::string Workspace::sweep_hash() const {
  Fnv1a h;
  h.update(vocab.fingerprint()).update(config.provider);
  if (config.builtin_provider()) {
    h.update_u64(static_cast<std::uint64_t>(config.lm.n_lm)).update_u64(static_cast<std::uint64_t>(config.lm.n_cache));
    h.update(num(config.lm.lambda)).update(num(config.lm.alpha));
  }
  for (const auto& [k, s] : config.sweep_config().stride) h.update_u64(k).update_u64(s);
  for (const auto& d : docs) {
    h.update(d.doc_id).update_u64(d.size());
    for (auto t : d.tokens) h.update_u64(t);
  }
  return h.hex();
}

void append_run_log(const fs::path& output, std::string_view command, const std::vector<std::string>& warnings) {
  fs::create_directories(output);
  std::ofstream log(output / "run_log.jsonl", std::ios::binary | std::ios::app);
  for (const auto& w : warnings) {
    ordered_json line;
    line["command"] = command;
    line["level"] = "warning";
    line["message"] = w;
    log << line.dump() << '\n';
  }
  ordered_json done;
  done["command"] = command;
  done["level"] = "info";
  done["message"] = "completed";
  log << done.dump() << '\n';
}

fs::path sweep_file(const fs::path& output, const std::string& doc_id, std::size_t k) {
  return output / "sweeps" / (doc_id + ".K" + std::to_string(k) + ".ndjson");
}

void cmd_train(const RunConfig& config) {
  if (!config.builtin_provider()) throw ConfigError("train requires the builtin provider");
  auto ws = Workspace::open(config);
  std::vector<Document> train;
  for (const auto& s : read_sources(config.train_corpus)) train.push_back(tokenize(s.text, ws.vocab, s.doc_id));
  const auto lm = CacheNGramLM::train(train, ws.vocab.size(), config.lm);
  const auto path = config.model_path();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  lm.save(path, ws.vocab.fingerprint());
  append_run_log(config.output, "train", {});
}

void cmd_sweep(const RunConfig& config, bool force) {
  auto ws = Workspace::open(config);
  const auto dir = config.output / "sweeps";
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw Error("sweep outputs already exist in " + dir.string() + "; pass --force to overwrite");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);

  const auto provider = open_provider(ws);
  const auto sweep_cfg = config.sweep_config();
  const auto max_k = config.context_lens.back();
  const auto hash = ws.sweep_hash();

  struct Task {
    std::size_t doc;
    std::size_t k;
  };
  std::vector<Task> tasks;
  std::vector<std::string> warnings = ws.warnings;
  for (std::size_t d = 0; d < ws.docs.size(); ++d) {
    if (ws.docs[d].size() < max_k) {
      warnings.push_back("document " + ws.docs[d].doc_id + " (" + std::to_string(ws.docs[d].size()) +
                         " tokens) is shorter than max K=" + std::to_string(max_k) + "; skipped");
      continue;
    }
    for (auto k : config.context_lens) tasks.push_back({d, k});
  }

  std::vector<SweepResult> results(tasks.size());
  parallel_for(tasks.size(), config.workers, [&](std::size_t t) {
    const auto& doc = ws.docs[tasks[t].doc];
    const auto k = tasks[t].k;
    try {
      results[t] = run_sweep_tier(*provider, doc, k, sweep_cfg.stride_for(k));
    } catch (const NotFoundError& e) {
      throw NotFoundError(std::string(e.what()) + " while sweeping " + doc.doc_id + " at K=" + std::to_string(k));
    }
    std::vector<TieredRecord> recs;
    recs.reserve(results[t].records.size());
    for (const auto& r : results[t].records) recs.push_back({k, r});
    write_interchange(sweep_file(config.output, doc.doc_id, k), {kSchemaVersion, ws.vocab.size(), provider->name(), hash},
                      recs);
  });

  if (!results.empty()) {
    const auto table = ppl_table(results);
    std::ofstream csv(config.output / "ppl.csv", std::ios::binary);
    csv << "# config_hash: " << config.hash() << '\n';
    // Wide layout: one row per document plus a corpus-mean row, one column per tier.
    csv << "doc_id";
    for (const auto& [k, ppl] : table.corpus) csv << ",K=" << k;
    csv << '\n';
    std::map<std::string, std::map<std::size_t, double>> by_doc;
    for (const auto& row : table.per_document) by_doc[row.doc_id][row.k] = row.ppl;
    for (const auto& [doc, tiers] : by_doc) {
      csv << doc;
      for (const auto& [k, ppl] : tiers) csv << ',' << num(ppl);
      csv << '\n';
    }
    csv << "*corpus*";
    for (const auto& [k, ppl] : table.corpus) csv << ',' << num(ppl);
    csv << '\n';
  }
  append_run_log(config.output, "sweep", warnings);
}

void cmd_frequency(const RunConfig& config) {
  if (config.frequency_corpus.empty()) throw ConfigError("no frequency_corpus configured");
  auto ws = Workspace::open(config);
  fs::create_directories(config.output);
  build_frequency_table(config.frequency_corpus, ws.vocab, config.workers).save(config.output / "freq.tsv");
  append_run_log(config.output, "frequency", {});
}

void cmd_analyze(const RunConfig& config, std::string_view analysis) {
  if (analysis != "all" && !is_analysis(analysis)) throw ConfigError("unknown analysis '" + std::string(analysis) + "'");
  auto ws = Workspace::open(config);
  const auto sweeps = load_sweeps(ws);
  std::vector<std::string> warnings = ws.warnings;
  warnings.insert(warnings.end(), sweeps.warnings.begin(), sweeps.warnings.end());
  auto tiers = build_pairs(ws, sweeps, warnings);

  std::vector<std::string_view> names;
  if (analysis == "all")
    names.assign(std::begin(kAnalyses), std::end(kAnalyses));
  else
    names.push_back(analysis);

  std::optional<FrequencyTable> freq;
  const bool need_freq = std::find(names.begin(), names.end(), "frequency") != names.end();
  if (need_freq && !config.frequency_corpus.empty())
    freq = build_frequency_table(config.frequency_corpus, ws.vocab, config.workers);

  ReportWriter writer(config.output / "reports", config.hash());
  for (auto name : names) analyze_one(name, ws, sweeps, tiers, freq, writer);
  append_run_log(config.output, "analyze " + std::string(analysis), warnings);
}

}  // namespace ctxprobe
