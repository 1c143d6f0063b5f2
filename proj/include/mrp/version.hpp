#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace mrp {

inline constexpr std::string_view kVersion = "0.1.0";

// FNV-1a over the canonical config text; stable across runs and platforms,
// embedded in every output file alongside version and seed.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash_hex(std::string_view canonical_config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical_config)));
  return std::string(buf);
}

}  // namespace mrp
