#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ctxprobe {

/// 64-bit FNV-1a. Stable across platforms and runs; used for artifact fingerprints.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes);
  Fnv1a& update_u64(std::uint64_t v);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string fnv1a_hex(std::string_view bytes);

}  // namespace ctxprobe
