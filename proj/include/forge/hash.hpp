// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace forge {

/// 64-bit FNV-1a. Used for stable content ids and config fingerprints, not
/// for anything adversarial.
constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

inline std::string fnv1a_hex(std::string_view data) { return to_hex(fnv1a64(data)); }

}  // namespace forge
