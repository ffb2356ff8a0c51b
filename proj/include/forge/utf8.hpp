// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <string>
#include <string_view>

namespace forge::text {

/// Decodes UTF-8 into code points. Malformed sequences decode to U+FFFD, one
/// replacement per offending byte.
std::u32string decode_utf8(std::string_view bytes);

std::string encode_utf8(std::u32string_view code_points);

void append_utf8(std::string& out, char32_t cp);

/// Number of code points in a UTF-8 string (same decoding rules as above).
std::size_t code_point_length(std::string_view bytes);

/// Unicode White_Space property.
bool is_whitespace(char32_t cp);

/// CJK unified ideographs, extensions A-G and compatibility ideographs.
bool is_cjk(char32_t cp);

inline bool is_ascii_alnum(char32_t cp) {
  return (cp >= U'0' && cp <= U'9') || (cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z');
}

}  // namespace forge::text
