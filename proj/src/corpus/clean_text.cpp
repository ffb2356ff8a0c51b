// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <algorithm>
#include <iterator>
#include <string_view>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "forge/corpus.hpp"
#include "forge/error.hpp"
#include "forge/utf8.hpp"

namespace forge::corpus {

namespace {

// Sorted; looked up with binary search on the lower-cased tag name.
constexpr std::string_view kHtmlElements[] = {
    "a",        "abbr",     "address",  "area",     "article",    "aside",    "audio",
    "b",        "base",     "bdi",      "bdo",      "blockquote", "body",     "br",
    "button",   "canvas",   "caption",  "center",   "cite",       "code",     "col",
    "colgroup", "data",     "datalist", "dd",       "del",        "details",  "dfn",
    "dialog",   "div",      "dl",       "dt",       "em",         "embed",    "fieldset",
    "figcaption", "figure", "font",     "footer",   "form",       "h1",       "h2",
    "h3",       "h4",       "h5",       "h6",       "head",       "header",   "hr",
    "html",     "i",        "iframe",   "img",      "input",      "ins",      "kbd",
    "label",    "legend",   "li",       "link",     "main",       "map",      "mark",
    "meta",     "meter",    "nav",      "noscript", "object",     "ol",       "optgroup",
    "option",   "output",   "p",        "param",    "picture",    "pre",      "progress",
    "q",        "rp",       "rt",       "ruby",     "s",          "samp",     "script",
    "section",  "select",   "small",    "source",   "span",       "strike",   "strong",
    "style",    "sub",      "summary",  "sup",      "table",      "tbody",    "td",
    "template", "textarea", "tfoot",    "th",       "thead",      "time",     "title",
    "tr",       "track",    "tt",       "u",        "ul",         "var",      "video",
    "wbr"};

bool is_html_element(const std::string& lower_name) {
  return std::binary_search(std::begin(kHtmlElements), std::end(kHtmlElements),
                            std::string_view{lower_name});
}

bool is_ascii_alpha(char32_t c) { return (c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z'); }

char32_t to_half_width(char32_t c) {
  if ((c >= 0xFF10 && c <= 0xFF19) || (c >= 0xFF21 && c <= 0xFF3A) || (c >= 0xFF41 && c <= 0xFF5A))
    return c - 0xFEE0;
  return c;
}

bool is_removed_control(char32_t c) {
  return (c < 0x20 || (c >= 0x7F && c <= 0x9F)) && !text::is_whitespace(c);
}

// Length of the HTML tag starting at s[i] == '<', or 0 if it is not one.
std::size_t html_tag_length(const std::u32string& s, std::size_t i) {
  std::size_t k = i + 1;
  if (k < s.size() && s[k] == U'/') ++k;
  if (k >= s.size() || !is_ascii_alpha(s[k])) return 0;
  std::string name;
  while (k < s.size() && text::is_ascii_alnum(s[k])) {
    char c = static_cast<char>(s[k]);
    name.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    ++k;
  }
  if (k >= s.size()) return 0;
  std::size_t end = 0;
  if (s[k] == U'>') {
    end = k;
  } else if (s[k] == U'/' && k + 1 < s.size() && s[k + 1] == U'>') {
    end = k + 1;
  } else if (text::is_whitespace(s[k])) {
    std::size_t m = k;
    while (m < s.size() && s[m] != U'<' && s[m] != U'>') ++m;
    if (m >= s.size() || s[m] != U'>') return 0;
    end = m;
  } else {
    return 0;
  }
  return is_html_element(name) ? end - i + 1 : 0;
}

bool strip_tags_once(std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  bool changed = false;
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == U'<') {
      if (std::size_t len = html_tag_length(s, i)) {
        out.push_back(U' ');
        i += len;
        changed = true;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  if (changed) s.swap(out);
  return changed;
}

std::string nfc(const std::string& utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const icu::UnicodeString src = icu::UnicodeString::fromUTF8(utf8);
  if (normalizer->isNormalized(src, status) && U_SUCCESS(status)) return utf8;
  status = U_ZERO_ERROR;
  icu::UnicodeString dst = normalizer->normalize(src, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

}  // namespace

std::string clean_text(std::string_view raw) {
  std::u32string s = text::decode_utf8(raw);

  std::u32string mapped;
  mapped.reserve(s.size());
  for (char32_t c : s) {
    c = to_half_width(c);
    if (!is_removed_control(c)) mapped.push_back(c);
  }

  while (strip_tags_once(mapped)) {
  }

  std::u32string collapsed;
  collapsed.reserve(mapped.size());
  bool pending_space = false;
  for (char32_t c : mapped) {
    if (text::is_whitespace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !collapsed.empty()) collapsed.push_back(U' ');
    pending_space = false;
    collapsed.push_back(c);
  }

  return nfc(text::encode_utf8(collapsed));
}

std::uint64_t count_tokens(std::string_view text_utf8) {
  const std::u32string s = text::decode_utf8(text_utf8);
  std::uint64_t count = 0;
  bool in_run = false;
  for (char32_t c : s) {
    if (text::is_ascii_alnum(c)) {
      if (!in_run) ++count;
      in_run = true;
      continue;
    }
    in_run = false;
    if (!text::is_whitespace(c)) ++count;
  }
  return count;
}

}  // namespace forge::corpus
