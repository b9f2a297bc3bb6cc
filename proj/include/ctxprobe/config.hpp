#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxprobe/ngram_lm.hpp"
#include "ctxprobe/sweep.hpp"
#include "json.hpp"

namespace ctxprobe {

/// Everything a run needs. Loaded from one JSON file whose keys match the
/// command-line flags (`n_lm` <-> `--n-lm`); flags override file values.
struct RunConfig {
  std::vector<std::filesystem::path> corpus;
  std::filesystem::path vocab;
  std::optional<std::filesystem::path> tags;
  /// "builtin" or "file:<path>".
  std::string provider = "builtin";
  /// Training corpus for the built-in LM; defaults to `corpus`.
  std::vector<std::filesystem::path> train_corpus;
  /// Model artifact; defaults to `<output>/model.lm`.
  std::optional<std::filesystem::path> model;
  LmParams lm;
  std::vector<std::size_t> context_lens = {256, 512, 1024, 2048};
  std::size_t stride_divisor = 200;
  std::map<std::size_t, std::size_t> strides;
  std::size_t ngram_n = 5;
  std::size_t ngram_lo = 3;
  std::size_t ngram_hi = 20;
  std::vector<std::filesystem::path> frequency_corpus;
  std::filesystem::path output = "ctxprobe-out";
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::optional<double> extra_breakpoint;

  static RunConfig from_json(const nlohmann::json& j);
  /// Reads `path` (when non-empty) and applies `overrides` on top.
  static RunConfig load(const std::filesystem::path& path, const nlohmann::json& overrides);

  nlohmann::json to_json() const;

  /// Throws ConfigError for missing inputs, unordered tiers, or N larger
  /// than the smallest tier.
  void validate() const;

  bool builtin_provider() const { return provider == "builtin"; }
  /// Path behind a `file:` provider.
  std::filesystem::path provider_path() const;
  std::filesystem::path model_path() const { return model ? *model : output / "model.lm"; }
  SweepConfig sweep_config() const;

  /// Fingerprint of every setting that shapes results. Output location,
  /// worker count and --force do not contribute.
  std::string hash() const;
};

}  // namespace ctxprobe
