#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "ctxprobe/corpus.hpp"
#include "ctxprobe/error.hpp"

namespace ctxprobe {
namespace {

constexpr std::array<std::string_view, 17> kClosedTags = {"CC", "DT",  "EX",  "IN",   "MD",  "PDT", "POS", "PRP", "PRP$",
                                                          "RP", "TO",  "WDT", "WP",   "WP$", "WRB", "PRT", "ADP"};

// Punctuation, symbols, numbers, list markers and other non-words.
constexpr std::array<std::string_view, 22> kOtherTags = {
    ".",     ",",     ":",   "``", "''", "\"",  "#",     "$",  "(",    ")",  "-LRB-",
    "-RRB-", "-NONE-", "CD", "SYM", "LS", "FW", "UH",    "HYPH", "NFP", "ADD", "AFX"};

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Function words with their usual Penn tag.
struct ClosedWord {
  std::string_view word;
  std::string_view tag;
};
constexpr ClosedWord kClosedWords[] = {
    {"a", "DT"},       {"an", "DT"},      {"the", "DT"},     {"this", "DT"},    {"that", "DT"},    {"these", "DT"},
    {"those", "DT"},   {"some", "DT"},    {"any", "DT"},     {"each", "DT"},    {"every", "DT"},   {"no", "DT"},
    {"all", "PDT"},    {"both", "DT"},    {"either", "DT"},  {"neither", "DT"}, {"of", "IN"},      {"in", "IN"},
    {"on", "IN"},      {"at", "IN"},      {"by", "IN"},      {"for", "IN"},     {"with", "IN"},    {"from", "IN"},
    {"into", "IN"},    {"onto", "IN"},    {"over", "IN"},    {"under", "IN"},   {"about", "IN"},   {"after", "IN"},
    {"before", "IN"},  {"between", "IN"}, {"through", "IN"}, {"during", "IN"},  {"without", "IN"}, {"within", "IN"},
    {"against", "IN"}, {"among", "IN"},   {"upon", "IN"},    {"if", "IN"},      {"because", "IN"}, {"while", "IN"},
    {"although", "IN"}, {"since", "IN"},  {"until", "IN"},   {"as", "IN"},      {"than", "IN"},    {"and", "CC"},
    {"or", "CC"},      {"but", "CC"},     {"nor", "CC"},     {"yet", "CC"},     {"so", "CC"},      {"to", "TO"},
    {"i", "PRP"},      {"you", "PRP"},    {"he", "PRP"},     {"she", "PRP"},    {"it", "PRP"},     {"we", "PRP"},
    {"they", "PRP"},   {"me", "PRP"},     {"him", "PRP"},    {"her", "PRP$"},   {"us", "PRP"},     {"them", "PRP"},
    {"my", "PRP$"},    {"your", "PRP$"},  {"his", "PRP$"},   {"its", "PRP$"},   {"our", "PRP$"},   {"their", "PRP$"},
    {"myself", "PRP"}, {"himself", "PRP"}, {"herself", "PRP"}, {"itself", "PRP"}, {"themselves", "PRP"},
    {"can", "MD"},     {"could", "MD"},   {"may", "MD"},     {"might", "MD"},   {"must", "MD"},    {"shall", "MD"},
    {"should", "MD"},  {"will", "MD"},    {"would", "MD"},   {"who", "WP"},     {"whom", "WP"},    {"whose", "WP$"},
    {"which", "WDT"},  {"what", "WP"},    {"when", "WRB"},   {"where", "WRB"},  {"why", "WRB"},    {"how", "WRB"},
    {"there", "EX"},   {"up", "RP"},      {"out", "RP"},     {"off", "RP"},     {"down", "RP"},
};

}  // namespace

std::string_view to_string(PosClass c) {
  switch (c) {
    case PosClass::noun: return "noun";
    case PosClass::verb: return "verb";
    case PosClass::adj: return "adj";
    case PosClass::adv: return "adv";
    case PosClass::closed: return "closed";
    case PosClass::other: return "other";
  }
  return "other";
}

PosClass pos_class_from_string(std::string_view name) {
  for (auto c : kAllPosClasses)
    if (to_string(c) == name) return c;
  throw Error("unknown POS class: " + std::string(name));
}

PosClass classify_pos(std::string_view tag, std::size_t* unknown_counter) {
  if (starts_with(tag, "NN")) return PosClass::noun;
  if (starts_with(tag, "VB")) return PosClass::verb;
  if (starts_with(tag, "JJ")) return PosClass::adj;
  if (starts_with(tag, "RB")) return PosClass::adv;
  if (std::find(kClosedTags.begin(), kClosedTags.end(), tag) != kClosedTags.end()) return PosClass::closed;
  if (std::find(kOtherTags.begin(), kOtherTags.end(), tag) != kOtherTags.end()) return PosClass::other;
  if (unknown_counter) ++*unknown_counter;
  return PosClass::other;
}

std::string fallback_tag(std::string_view word) {
  if (word.empty()) return "SYM";
  std::string lower(word);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });

  bool any_alpha = false, any_digit = false, numeric = true;
  for (unsigned char c : lower) {
    if (std::isalpha(c) || c >= 0x80) any_alpha = true;
    if (std::isdigit(c)) any_digit = true;
    if (!std::isdigit(c) && c != '.' && c != ',') numeric = false;
  }
  if (numeric && any_digit) return "CD";
  if (!any_alpha) {
    if (lower == ",") return ",";
    if (lower == ":" || lower == ";") return ":";
    if (lower == "." || lower == "!" || lower == "?") return ".";
    return "SYM";
  }

  for (const auto& cw : kClosedWords)
    if (cw.word == lower) return std::string(cw.tag);
  if (ends_with(lower, "ly")) return "RB";
  if (ends_with(lower, "ous") || ends_with(lower, "ful") || ends_with(lower, "ive")) return "JJ";
  return "NN";
}

void attach_fallback_tags(Document& doc) {
  std::vector<TaggedWord> tags;
  tags.reserve(doc.words.size());
  for (const auto& w : doc.words) tags.push_back({w, fallback_tag(w)});
  attach_pos_tags(doc, tags);
}

}  // namespace ctxprobe
