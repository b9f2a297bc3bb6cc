#include "ctxprobe/synth.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <unordered_set>

#include "ctxprobe/error.hpp"

namespace ctxprobe {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

// Draws rank r with probability proportional to 1 / (r + 1).
class Zipf {
 public:
  explicit Zipf(std::size_t n) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) cdf_[r] = acc += 1.0 / static_cast<double>(r + 1);
    for (auto& c : cdf_) c /= acc;
  }
  std::size_t draw(Rng& rng) const {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), rng.unit());
    return it == cdf_.end() ? cdf_.size() - 1 : static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

struct Word {
  std::string text;
  std::string tag;
};

struct Lexicon {
  std::vector<std::string> syllables;
  std::vector<Word> nouns, verbs, adjs, advs;
  std::vector<Word> dets, preps, conjs, prons;
  std::vector<std::string> vocab;
};

const std::vector<Word> kDeterminers = {{"the", "DT"}, {"a", "DT"}, {"this", "DT"}, {"that", "DT"}, {"every", "DT"}};
const std::vector<Word> kPrepositions = {{"of", "IN"},   {"in", "IN"},  {"on", "IN"},  {"with", "IN"},
                                         {"for", "IN"},  {"by", "IN"},  {"from", "IN"}};
const std::vector<Word> kConjunctions = {{"and", "CC"}, {"but", "CC"}, {"or", "CC"}};
const std::vector<Word> kPronouns = {{"it", "PRP"}, {"they", "PRP"}, {"we", "PRP"}, {"he", "PRP"}, {"she", "PRP"}};

Lexicon build_lexicon(const SynthConfig& cfg) {
  Rng rng(cfg.lexicon_seed);
  Lexicon lex;
  for (char c : kConsonants)
    for (char v : kVowels) lex.syllables.push_back(std::string{c, v});

  std::unordered_set<std::string> used;
  for (const auto* list : {&kDeterminers, &kPrepositions, &kConjunctions, &kPronouns})
    for (const auto& w : *list) used.insert(w.text);

  auto stem = [&] {
    const std::size_t n = 1 + rng.below(3);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += lex.syllables[rng.below(lex.syllables.size())];
    return s;
  };
  auto fill = [&](std::vector<Word>& out, const std::vector<std::string>& suffixes, const std::string& tag) {
    while (out.size() < cfg.lexicon_per_class) {
      std::string w = stem() + suffixes[rng.below(suffixes.size())];
      if (used.insert(w).second) out.push_back({w, tag});
    }
  };
  fill(lex.nouns, {""}, "NN");
  fill(lex.verbs, {"ed"}, "VBD");
  fill(lex.adjs, {"ous", "ful", "ive"}, "JJ");
  fill(lex.advs, {"ly"}, "RB");
  lex.dets = kDeterminers;
  lex.preps = kPrepositions;
  lex.conjs = kConjunctions;
  lex.prons = kPronouns;

  std::set<std::string> seen;
  auto push = [&](const std::string& e) {
    if (seen.insert(e).second) lex.vocab.push_back(e);
  };
  for (const auto& s : lex.syllables) push(s);
  for (const char* s : {"ous", "ful", "ive", "ly", "ed", ".", ","}) push(s);
  for (const auto* list : {&lex.dets, &lex.preps, &lex.conjs, &lex.prons})
    for (const auto& w : *list) push(w.text);
  // The most frequent nouns become whole-word tokens.
  for (std::size_t r = 0; r < std::min<std::size_t>(60, lex.nouns.size()); ++r) push(lex.nouns[r].text);
  for (char c = 'a'; c <= 'z'; ++c) push(std::string(1, c));
  return lex;
}

struct DocState {
  const Lexicon& lex;
  Rng& rng;
  const Zipf& open_zipf;
  std::vector<Word> topic;
  double topic_rate;

  const Word& pick(const std::vector<Word>& list) { return list[open_zipf.draw(rng) % list.size()]; }
  const Word& closed(const std::vector<Word>& list) { return list[rng.below(list.size())]; }
  const Word& noun() {
    if (!topic.empty() && rng.chance(topic_rate)) return topic[rng.below(topic.size())];
    return pick(lex.nouns);
  }

  void sentence(std::vector<Word>& out) {
    switch (rng.below(3)) {
      case 0:
        out.push_back(closed(lex.dets));
        if (rng.chance(0.5)) out.push_back(pick(lex.adjs));
        out.push_back(noun());
        out.push_back(pick(lex.verbs));
        if (rng.chance(0.5)) out.push_back(pick(lex.advs));
        out.push_back(closed(lex.preps));
        out.push_back(closed(lex.dets));
        out.push_back(noun());
        break;
      case 1:
        out.push_back(closed(lex.dets));
        out.push_back(noun());
        out.push_back(pick(lex.verbs));
        out.push_back(closed(lex.dets));
        out.push_back(noun());
        out.push_back({",", ","});
        out.push_back(closed(lex.conjs));
        out.push_back(closed(lex.dets));
        out.push_back(noun());
        out.push_back(pick(lex.verbs));
        out.push_back(pick(lex.advs));
        break;
      default:
        out.push_back(closed(lex.prons));
        out.push_back(pick(lex.verbs));
        out.push_back(closed(lex.dets));
        out.push_back(pick(lex.adjs));
        out.push_back(noun());
        out.push_back(closed(lex.preps));
        out.push_back(noun());
        break;
    }
    out.push_back({".", "."});
  }
};

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& cfg) {
  if (cfg.lexicon_per_class < 10) throw ConfigError("lexicon_per_class must be at least 10");
  if (cfg.motif_min_words < 1 || cfg.motif_min_words > cfg.motif_max_words)
    throw ConfigError("motif word range must satisfy 1 <= min <= max");
  const Lexicon lex = build_lexicon(cfg);
  const Zipf open_zipf(cfg.lexicon_per_class);
  Rng rng(cfg.seed);

  SynthCorpus corpus;
  corpus.vocab_entries = lex.vocab;
  for (std::size_t d = 0; d < cfg.num_docs; ++d) {
    DocState st{lex, rng, open_zipf, {}, cfg.topic_rate};
    // Topic nouns come from the rarer end of the lexicon.
    const std::size_t rare_from = cfg.lexicon_per_class / 4;
    for (std::size_t t = 0; t < cfg.topic_words_per_doc; ++t)
      st.topic.push_back(lex.nouns[rare_from + rng.below(cfg.lexicon_per_class - rare_from)]);

    std::vector<std::vector<Word>> motifs(cfg.motifs_per_doc);
    for (auto& m : motifs) {
      const std::size_t len = cfg.motif_min_words + rng.below(cfg.motif_max_words - cfg.motif_min_words + 1);
      while (m.size() < len) {
        switch (rng.below(5)) {
          case 0: m.push_back(st.closed(lex.dets)); break;
          case 1: m.push_back(lex.adjs[rng.below(lex.adjs.size())]); break;
          case 2: m.push_back(lex.verbs[rng.below(lex.verbs.size())]); break;
          case 3: m.push_back(st.closed(lex.preps)); break;
          default: m.push_back(st.topic.empty() ? st.pick(lex.nouns) : st.topic[rng.below(st.topic.size())]); break;
        }
      }
      m.push_back({".", "."});
    }

    std::vector<Word> words;
    while (words.size() < cfg.words_per_doc) {
      if (!motifs.empty() && rng.chance(cfg.motif_rate)) {
        const auto& m = motifs[rng.below(motifs.size())];
        words.insert(words.end(), m.begin(), m.end());
      } else {
        st.sentence(words);
      }
    }

    SourceText doc;
    char id[64];
    std::snprintf(id, sizeof id, "%s%03zu", cfg.doc_prefix.c_str(), d);
    doc.doc_id = id;
    std::vector<TaggedWord> tags;
    bool sentence_end = false;
    for (const auto& w : words) {
      const bool punct = w.text == "." || w.text == ",";
      if (!doc.text.empty() && !punct) doc.text += sentence_end ? '\n' : ' ';
      doc.text += w.text;
      tags.push_back({w.text, w.tag});
      sentence_end = w.text == ".";
    }
    doc.text += '\n';
    corpus.docs.push_back(std::move(doc));
    corpus.tags.push_back(std::move(tags));
  }
  return corpus;
}

void write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "docs");
  {
    std::ofstream v(dir / "vocab.txt", std::ios::binary);
    for (const auto& e : corpus.vocab_entries) v << e << '\n';
  }
  std::ofstream tags(dir / "tags.tsv", std::ios::binary);
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    std::ofstream out(dir / "docs" / (corpus.docs[d].doc_id + ".txt"), std::ios::binary);
    out << corpus.docs[d].text;
    if (d) tags << '\n';
    for (const auto& t : corpus.tags[d]) tags << t.word << '\t' << t.tag << '\n';
  }
  if (!tags) throw Error("failed writing corpus under " + dir.string());
}

}  // namespace ctxprobe
