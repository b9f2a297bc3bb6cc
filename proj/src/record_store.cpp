#include "ctxprobe/record_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ctxprobe/error.hpp"
#include "json.hpp"

namespace ctxprobe {
namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

constexpr double kProbTolerance = 1e-9;

template <typename T>
T field(const json& j, const char* name, const std::string& where) {
  if (!j.contains(name)) throw ValidationError(where + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(where + ": field '" + name + "' has wrong type");
  }
}

void validate(const PredictionRecord& r, std::size_t tier, std::size_t vocab_size, const std::string& where) {
  if (!std::isfinite(r.log_prob) || r.log_prob > 0.0) throw ValidationError(where + ": log_prob must be finite and <= 0");
  if (!std::isfinite(r.max_prob) || r.max_prob < 0.0 || r.max_prob > 1.0 + kProbTolerance)
    throw ValidationError(where + ": max_prob outside [0, 1]");
  const double p = std::exp(r.log_prob);
  if (r.max_prob < p * (1.0 - kProbTolerance) - 1e-300) throw ValidationError(where + ": max_prob < exp(log_prob)");
  const double max_entropy = std::log(static_cast<double>(vocab_size));
  if (!std::isfinite(r.entropy) || r.entropy < -kProbTolerance || r.entropy > max_entropy + kProbTolerance)
    throw ValidationError(where + ": entropy outside [0, ln V]");
  if (r.argmax_id >= vocab_size) throw ValidationError(where + ": argmax_id outside vocabulary");
  if (r.context_len > tier) throw ValidationError(where + ": context_len exceeds tier k");
}

}  // namespace

void write_interchange(const std::filesystem::path& path, const InterchangeHeader& header,
                       std::span<const TieredRecord> records) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    ordered_json h;
    h["schema_version"] = header.schema_version;
    h["vocab_size"] = header.vocab_size;
    h["tokenizer_name"] = header.tokenizer_name;
    if (!header.config_hash.empty()) h["config_hash"] = header.config_hash;
    out << h.dump() << '\n';
    for (const auto& [tier, r] : records) {
      ordered_json j;
      j["doc_id"] = r.doc_id;
      j["token_index"] = r.token_index;
      j["context_len"] = r.context_len;
      j["k"] = tier;
      j["log_prob"] = r.log_prob;
      j["entropy"] = r.entropy;
      j["max_prob"] = r.max_prob;
      j["argmax_id"] = r.argmax_id;
      j["correct"] = r.correct;
      out << j.dump() << '\n';
    }
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

InterchangeFile read_interchange(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read interchange file " + path.string());
  InterchangeFile file;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<std::size_t> untiered;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw ValidationError(where + ": not valid JSON");
    }
    if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
    if (!have_header) {
      file.header.schema_version = field<int>(j, "schema_version", where);
      if (file.header.schema_version != kSchemaVersion)
        throw ValidationError(where + ": unsupported schema_version " + std::to_string(file.header.schema_version));
      file.header.vocab_size = field<std::size_t>(j, "vocab_size", where);
      file.header.tokenizer_name = field<std::string>(j, "tokenizer_name", where);
      if (j.contains("config_hash")) file.header.config_hash = field<std::string>(j, "config_hash", where);
      if (file.header.vocab_size == 0) throw ValidationError(where + ": vocab_size must be positive");
      have_header = true;
      continue;
    }
    TieredRecord tr;
    auto& r = tr.record;
    r.doc_id = field<std::string>(j, "doc_id", where);
    r.token_index = field<std::size_t>(j, "token_index", where);
    r.context_len = field<std::size_t>(j, "context_len", where);
    r.log_prob = field<double>(j, "log_prob", where);
    r.entropy = field<double>(j, "entropy", where);
    r.max_prob = field<double>(j, "max_prob", where);
    r.argmax_id = field<TokenId>(j, "argmax_id", where);
    r.correct = field<bool>(j, "correct", where);
    if (j.contains("k")) {
      tr.tier = field<std::size_t>(j, "k", where);
      validate(r, tr.tier, file.header.vocab_size, where);
    } else {
      untiered.push_back(file.records.size());
      validate(r, r.context_len, file.header.vocab_size, where);
    }
    file.records.push_back(std::move(tr));
  }
  if (!have_header) throw ValidationError(path.string() + ": missing header line");
  // Untiered records form one tier: the largest context_len rounded up to
  // even, which is K whether context_len holds K or the actual context (<= K-1).
  std::size_t inferred = 0;
  for (auto idx : untiered) inferred = std::max(inferred, file.records[idx].record.context_len);
  inferred += inferred % 2;
  for (auto idx : untiered) file.records[idx].tier = inferred;
  return file;
}

void RecordStore::add_file(InterchangeFile file, const std::string& origin) {
  if (vocab_size_ == 0) {
    vocab_size_ = file.header.vocab_size;
    tokenizer_name_ = file.header.tokenizer_name;
  } else if (vocab_size_ != file.header.vocab_size) {
    throw ValidationError(origin + ": vocab_size " + std::to_string(file.header.vocab_size) +
                          " disagrees with previously loaded " + std::to_string(vocab_size_));
  } else if (tokenizer_name_ != file.header.tokenizer_name) {
    warnings_.push_back(origin + ": tokenizer_name '" + file.header.tokenizer_name + "' differs from '" +
                        tokenizer_name_ + "'");
  }
  if (!file.header.config_hash.empty() &&
      std::find(config_hashes_.begin(), config_hashes_.end(), file.header.config_hash) == config_hashes_.end())
    config_hashes_.push_back(file.header.config_hash);
  for (auto& [tier, r] : file.records) {
    Key key{r.doc_id, tier, r.token_index};
    if (records_.count(key))
      throw ValidationError(origin + ": duplicate record for (" + r.doc_id + ", K=" + std::to_string(tier) +
                            ", i=" + std::to_string(r.token_index) + ")");
    records_.emplace(std::move(key), std::move(r));
  }
}

bool RecordStore::contains(const std::string& doc_id, std::size_t tier, std::size_t token_index) const {
  return records_.count(Key{doc_id, tier, token_index}) != 0;
}

const PredictionRecord& RecordStore::lookup(const std::string& doc_id, std::size_t tier, std::size_t token_index) const {
  auto it = records_.find(Key{doc_id, tier, token_index});
  if (it == records_.end())
    throw NotFoundError("no record for (" + doc_id + ", K=" + std::to_string(tier) + ", i=" +
                        std::to_string(token_index) + ")");
  return it->second;
}

PredictionRecord RecordStore::score(const ScoreRequest& request) const {
  return lookup(std::string(request.doc_id), request.tier, request.token_index);
}

RecordStore open_record_store(std::span<const std::filesystem::path> paths) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> inner;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".ndjson") inner.push_back(e.path());
      std::sort(inner.begin(), inner.end());
      files.insert(files.end(), inner.begin(), inner.end());
    } else {
      files.push_back(p);
    }
  }
  RecordStore store;
  for (const auto& f : files) store.add_file(read_interchange(f), f.string());
  return store;
}

RecordStore open_record_store(const std::filesystem::path& path) {
  return open_record_store(std::span<const std::filesystem::path>(&path, 1));
}

}  // namespace ctxprobe
