#include <random>

#include "ctxprobe/corpus.hpp"
#include "ctxprobe/error.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace ctxprobe;

namespace {

Vocabulary char_vocab(std::string_view text) {
  Vocabulary v;
  v.add_fallback_chars(text);
  return v;
}

}  // namespace

TEST_CASE("tokenize: single exact match") {
  Vocabulary v({"cat"});
  auto doc = tokenize("cat", v);
  REQUIRE(doc.size() == 1);
  CHECK(doc.within_word_pos == std::vector<std::uint32_t>{0});
  CHECK(doc.pos_class[0] == PosClass::other);
}

TEST_CASE("tokenize: greedy longest prefix splits catfish") {
  Vocabulary v({"c", "a", "t", "f", "i", "s", "h", "cat", "fish", "ca"});
  auto doc = tokenize("catfish", v);
  REQUIRE(doc.size() == 2);
  CHECK(doc.token_strings == std::vector<std::string>{"cat", "fish"});
  CHECK(doc.word_index == std::vector<std::uint32_t>{0, 0});
  CHECK(doc.within_word_pos == std::vector<std::uint32_t>{0, 1});
  CHECK(doc.is_first_subword(0));
  CHECK_FALSE(doc.is_first_subword(1));
}

TEST_CASE("tokenize: greedy match takes the longest entry even when a shorter split exists") {
  Vocabulary v({"ab", "abc", "cd", "d", "a", "b", "c"});
  // Longest prefix "abc" wins, leaving "d".
  auto doc = tokenize("abcd", v);
  CHECK(doc.token_strings == std::vector<std::string>{"abc", "d"});
}

TEST_CASE("tokenize: whitespace separates words") {
  auto v = char_vocab("ab");
  auto doc = tokenize("a b", v);
  REQUIRE(doc.size() == 2);
  CHECK(doc.word_index == std::vector<std::uint32_t>{0, 1});
  CHECK(doc.within_word_pos == std::vector<std::uint32_t>{0, 0});
}

TEST_CASE("tokenize: punctuation becomes its own word") {
  auto v = char_vocab("dog.,!");
  v.add("dog");
  auto doc = tokenize("dog, dog!", v);
  CHECK(doc.words == std::vector<std::string>{"dog", ",", "dog", "!"});
  CHECK(doc.size() == 4);
}

TEST_CASE("tokenize: empty input gives an empty document") {
  Vocabulary v({"a"});
  CHECK(tokenize("", v).empty());
  CHECK(tokenize("  \n\t ", v).empty());
}

TEST_CASE("tokenize: uncovered character is an error") {
  Vocabulary v({"a"});
  CHECK_THROWS_AS(tokenize("ab", v), Error);
}

TEST_CASE("vocabulary: fallback entries cover multibyte characters") {
  Vocabulary v({"x"});
  const std::string text = "x\xc3\xa9x \xe2\x82\xac";  // "xéx €"
  CHECK(v.add_fallback_chars(text) == 2);
  CHECK(v.add_fallback_chars(text) == 0);
  auto doc = tokenize(text, v);
  CHECK(doc.token_strings == std::vector<std::string>{"x", "\xc3\xa9", "x", "\xe2\x82\xac"});
}

TEST_CASE("vocabulary: ids are dense and bijective") {
  Vocabulary v({"a", "b", "cc"});
  for (TokenId i = 0; i < v.size(); ++i) CHECK(v.id(v.at(i)) == i);
  CHECK_THROWS_AS(Vocabulary({"a", "a"}), Error);
  CHECK_THROWS_AS(Vocabulary({"a", ""}), Error);
  CHECK_THROWS_AS(v.id("zz"), std::out_of_range);
}

TEST_CASE("vocabulary: load and save round-trip with fingerprint") {
  testing::TempDir dir("vocab");
  Vocabulary v({"a", "bc", "\xc3\xa9"});
  v.save(dir / "v.txt");
  auto back = Vocabulary::load(dir / "v.txt");
  CHECK(back.entries() == v.entries());
  CHECK(back.fingerprint() == v.fingerprint());
  back.add("zz");
  CHECK(back.fingerprint() != v.fingerprint());
}

TEST_CASE("document invariants hold on random text (property)") {
  std::mt19937_64 rng(11);
  const std::string alphabet = "abcde  ,.!\n";
  Vocabulary v({"ab", "abc", "de", "cde", "e"});
  v.add_fallback_chars(alphabet);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const auto len = rng() % 80;
    for (std::size_t i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    const auto doc = tokenize(text, v);

    // Round-trip against the whitespace-normalized source.
    CHECK(detokenize(doc) == normalize_whitespace(text));
    // Determinism.
    const auto again = tokenize(text, v);
    CHECK(again.tokens == doc.tokens);
    CHECK(again.word_index == doc.word_index);

    std::vector<std::string> rebuilt(doc.words.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      rebuilt[doc.word_index[i]] += doc.token_strings[i];
      if (i == 0) {
        CHECK(doc.within_word_pos[i] == 0);
      } else {
        CHECK(doc.word_index[i] >= doc.word_index[i - 1]);
        const bool new_word = doc.word_index[i] != doc.word_index[i - 1];
        CHECK((doc.within_word_pos[i] == 0) == new_word);
      }
    }
    CHECK(rebuilt == doc.words);
  }
}

TEST_CASE("classify_pos: Penn tags map onto six classes") {
  CHECK(classify_pos("NN") == PosClass::noun);
  CHECK(classify_pos("NNS") == PosClass::noun);
  CHECK(classify_pos("NNPS") == PosClass::noun);
  CHECK(classify_pos("VBD") == PosClass::verb);
  CHECK(classify_pos("VBZ") == PosClass::verb);
  CHECK(classify_pos("JJR") == PosClass::adj);
  CHECK(classify_pos("RB") == PosClass::adv);
  CHECK(classify_pos("RBS") == PosClass::adv);
  for (const char* t : {"IN", "DT", "PRP", "PRP$", "CC", "TO", "MD", "WDT", "WP", "RP", "EX", "PDT", "POS"})
    CHECK_MESSAGE(classify_pos(t) == PosClass::closed, t);
  for (const char* t : {"SYM", ".", ",", ":", "``", "''", "CD", "-LRB-", "-RRB-", "#", "$"})
    CHECK_MESSAGE(classify_pos(t) == PosClass::other, t);
}

TEST_CASE("classify_pos: unknown tags count toward the warning counter") {
  std::size_t unknown = 0;
  CHECK(classify_pos("XYZ", &unknown) == PosClass::other);
  CHECK(classify_pos("NN", &unknown) == PosClass::noun);
  CHECK(classify_pos("", &unknown) == PosClass::other);
  CHECK(unknown == 2);
}

TEST_CASE("content flag covers exactly the open classes") {
  for (auto c : kAllPosClasses)
    CHECK(is_content(c) == (c == PosClass::noun || c == PosClass::verb || c == PosClass::adj || c == PosClass::adv));
  for (auto c : kAllPosClasses) CHECK(pos_class_from_string(to_string(c)) == c);
}

TEST_CASE("attach_pos_tags: every subword inherits its word's class") {
  Vocabulary v({"do", "g", "quick", "ly", "."});
  auto doc = tokenize("dog quickly.", v);
  REQUIRE(doc.size() == 5);
  std::vector<TaggedWord> tags = {{"dog", "NN"}, {"quickly", "RB"}, {".", "."}};
  attach_pos_tags(doc, tags);
  CHECK(doc.pos_class ==
        std::vector<PosClass>{PosClass::noun, PosClass::noun, PosClass::adv, PosClass::adv, PosClass::other});
}

TEST_CASE("attach_pos_tags: mismatches name the first bad word") {
  auto v = char_vocab("abc");
  auto doc = tokenize("a b c", v);
  std::vector<TaggedWord> wrong = {{"a", "NN"}, {"x", "NN"}, {"c", "NN"}};
  try {
    attach_pos_tags(doc, wrong);
    FAIL("expected alignment error");
  } catch (const AlignmentError& e) {
    CHECK(e.index() == 1);
  }
  std::vector<TaggedWord> short_tags = {{"a", "NN"}, {"b", "NN"}};
  try {
    attach_pos_tags(doc, short_tags);
    FAIL("expected alignment error");
  } catch (const AlignmentError& e) {
    CHECK(e.index() == 2);
  }
}

TEST_CASE("read_tag_file: blank lines separate documents") {
  testing::TempDir dir("tags");
  testing::write_file(dir / "t.tsv", "a\tDT\nb\tNN\n\n\nc\tVB\r\n");
  auto docs = read_tag_file(dir / "t.tsv");
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].size() == 2);
  CHECK(docs[1][0].word == "c");
  CHECK(docs[1][0].tag == "VB");
  testing::write_file(dir / "bad.tsv", "a DT\n");
  CHECK_THROWS_AS(read_tag_file(dir / "bad.tsv"), Error);
}

TEST_CASE("fallback tagger: closed words, suffix rules and punctuation") {
  CHECK(classify_pos(fallback_tag("the")) == PosClass::closed);
  CHECK(classify_pos(fallback_tag("of")) == PosClass::closed);
  CHECK(classify_pos(fallback_tag("quickly")) == PosClass::adv);
  CHECK(classify_pos(fallback_tag("famous")) == PosClass::adj);
  CHECK(classify_pos(fallback_tag("careful")) == PosClass::adj);
  CHECK(classify_pos(fallback_tag("massive")) == PosClass::adj);
  CHECK(classify_pos(fallback_tag("table")) == PosClass::noun);
  CHECK(classify_pos(fallback_tag("42")) == PosClass::other);
  CHECK(classify_pos(fallback_tag(".")) == PosClass::other);
  CHECK(classify_pos(fallback_tag("!")) == PosClass::other);
  std::size_t unknown = 0;
  for (const char* w : {".", ",", ";", "!", "?", "(", "#", "3.5", "word"}) classify_pos(fallback_tag(w), &unknown);
  CHECK(unknown == 0);
}

TEST_CASE("read_sources: directories expand to sorted files keyed by stem") {
  testing::TempDir dir("sources");
  testing::write_file(dir / "c/b.txt", "second");
  testing::write_file(dir / "c/a.txt", "first");
  std::vector<std::filesystem::path> paths = {dir / "c"};
  auto src = read_sources(paths);
  REQUIRE(src.size() == 2);
  CHECK(src[0].doc_id == "a");
  CHECK(src[1].text == "second");
  std::vector<std::filesystem::path> missing = {dir / "nope"};
  CHECK_THROWS_AS(read_sources(missing), Error);
}
