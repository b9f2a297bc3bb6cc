#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ctxprobe/provider.hpp"

namespace ctxprobe {

inline constexpr int kSchemaVersion = 1;

/// First line of every interchange file.
struct InterchangeHeader {
  int schema_version = kSchemaVersion;
  std::size_t vocab_size = 0;
  std::string tokenizer_name;
  /// Fingerprint of the run configuration that produced the file; empty for
  /// files written by external extractors.
  std::string config_hash;
};

/// A record plus the context-length tier it was produced for.
struct TieredRecord {
  std::size_t tier = 0;
  PredictionRecord record;
};

struct InterchangeFile {
  InterchangeHeader header;
  std::vector<TieredRecord> records;
};

/// Newline-delimited JSON: one header line, then one record per line with the
/// PredictionRecord fields and a `k` tier field. Written to a temporary file
/// and renamed into place.
void write_interchange(const std::filesystem::path& path, const InterchangeHeader& header,
                       std::span<const TieredRecord> records);

/// Parses and validates one file. Records without a `k` field share one tier:
/// the file's largest `context_len`, rounded up to even. Throws
/// ValidationError on any invariant violation.
InterchangeFile read_interchange(const std::filesystem::path& path);

/// Read-only keyed provider over one or more interchange files.
class RecordStore : public LogProbProvider {
 public:
  using Key = std::tuple<std::string, std::size_t, std::size_t>;

  void add_file(InterchangeFile file, const std::string& origin);

  /// Throws NotFoundError naming the key.
  const PredictionRecord& lookup(const std::string& doc_id, std::size_t tier, std::size_t token_index) const;
  bool contains(const std::string& doc_id, std::size_t tier, std::size_t token_index) const;

  PredictionRecord score(const ScoreRequest& request) const override;
  std::size_t vocab_size() const override { return vocab_size_; }
  std::string name() const override { return "record-store:" + tokenizer_name_; }

  std::size_t size() const { return records_.size(); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  /// Config hashes seen across loaded headers (empty strings excluded).
  const std::vector<std::string>& config_hashes() const { return config_hashes_; }
  const std::map<Key, PredictionRecord>& records() const { return records_; }

 private:
  std::map<Key, PredictionRecord> records_;
  std::size_t vocab_size_ = 0;
  std::string tokenizer_name_;
  std::vector<std::string> warnings_;
  std::vector<std::string> config_hashes_;
};

/// Loads every file (directories expand to their `.ndjson` files, sorted).
/// Duplicate (doc_id, tier, token_index) keys are an error.
RecordStore open_record_store(std::span<const std::filesystem::path> paths);
RecordStore open_record_store(const std::filesystem::path& path);

}  // namespace ctxprobe
