// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include "forge/annotation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "forge/utf8.hpp"

namespace forge::annotation {

using Json = nlohmann::json;

namespace {

constexpr std::string_view kLabelNames[] = {"ICH-TITLE", "ICH-PLACE", "ICH-TERM"};

bool is_tag_name_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
         c == '-' || c == '_';
}

bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

std::size_t first_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t start = i;
    // Decode one code point at a time and compare its re-encoding.
    std::size_t len = 1;
    const auto b = static_cast<unsigned char>(s[i]);
    if (b >= 0xF0) len = 4;
    else if (b >= 0xE0) len = 3;
    else if (b >= 0xC0) len = 2;
    const auto chunk = s.substr(start, len);
    if (text::encode_utf8(text::decode_utf8(chunk)) != chunk) return start;
    i += len;
  }
  return std::string_view::npos;
}

std::string describe(const EntitySpan& s) {
  return "(" + std::to_string(s.start) + "," + std::to_string(s.end) + "," +
         std::string(to_string(s.label)) + ")";
}

bool surface_ok(std::string_view surface) {
  if (surface.empty()) return false;
  for (char32_t c : text::decode_utf8(surface))
    if (c == U'/' || text::is_whitespace(c)) return false;
  return true;
}

}  // namespace

std::string_view to_string(EntityLabel label) {
  return kLabelNames[static_cast<std::size_t>(label)];
}

std::optional<EntityLabel> parse_label(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kLabelNames); ++i)
    if (kLabelNames[i] == name) return static_cast<EntityLabel>(i);
  return std::nullopt;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Overlap: return "overlap";
    case ViolationKind::OutOfBounds: return "out-of-bounds";
    case ViolationKind::EmptySpan: return "empty-span";
    case ViolationKind::Unsorted: return "unsorted";
    case ViolationKind::UnknownLabel: return "unknown-label";
    case ViolationKind::MalformedRecord: return "malformed-record";
    case ViolationKind::PosMismatch: return "pos-mismatch";
    case ViolationKind::PosInvalidToken: return "pos-invalid-token";
  }
  return "unknown";
}

AnnotatedDocument parse_annotated_text(std::string_view markup, std::string doc_id) {
  if (auto bad = first_invalid_utf8(markup); bad != std::string_view::npos)
    throw ParseError("invalid UTF-8 at byte offset " + std::to_string(bad), bad);

  AnnotatedDocument doc;
  doc.doc_id = std::move(doc_id);
  doc.text.reserve(markup.size());

  std::size_t cp = 0;  // code points emitted so far
  std::optional<EntityLabel> open;
  std::size_t open_start = 0;
  std::size_t open_offset = 0;

  auto emit = [&](char c) {
    doc.text.push_back(c);
    if (!is_continuation(c)) ++cp;
  };

  for (std::size_t i = 0; i < markup.size();) {
    const char c = markup[i];
    if (c == '&') {
      if (markup.substr(i, 4) == "&lt;") {
        emit('<');
        i += 4;
      } else if (markup.substr(i, 5) == "&amp;") {
        emit('&');
        i += 5;
      } else {
        throw ParseError("invalid escape at byte offset " + std::to_string(i), i);
      }
      continue;
    }
    if (c != '<') {
      emit(c);
      ++i;
      continue;
    }

    const std::size_t close = markup.find('>', i);
    if (close == std::string_view::npos)
      throw ParseError("unterminated tag at byte offset " + std::to_string(i), i);
    std::string_view body = markup.substr(i + 1, close - i - 1);
    const bool closing = !body.empty() && body.front() == '/';
    if (closing) body.remove_prefix(1);
    if (body.empty() || !std::all_of(body.begin(), body.end(), is_tag_name_char))
      throw ParseError("malformed tag at byte offset " + std::to_string(i), i);

    const auto label = parse_label(body);
    if (!label)
      throw ParseError("unknown label " + std::string(body) + " at byte offset " + std::to_string(i),
                       i);

    if (!closing) {
      if (open)
        throw ParseError("nested tag <" + std::string(body) + "> inside <" +
                             std::string(to_string(*open)) + "> at byte offset " +
                             std::to_string(i),
                         i);
      open = label;
      open_start = cp;
      open_offset = i;
    } else {
      if (!open)
        throw ParseError("closing tag </" + std::string(body) +
                             "> without opening tag at byte offset " + std::to_string(i),
                         i);
      if (*open != *label)
        throw ParseError("mismatched closing tag </" + std::string(body) + "> for <" +
                             std::string(to_string(*open)) + "> at byte offset " +
                             std::to_string(i),
                         i);
      if (cp == open_start)
        throw ParseError("empty entity <" + std::string(body) + "> at byte offset " +
                             std::to_string(open_offset),
                         open_offset);
      doc.entities.push_back({open_start, cp, *label});
      open.reset();
    }
    i = close + 1;
  }
  if (open)
    throw ParseError("unclosed tag <" + std::string(to_string(*open)) + "> at byte offset " +
                         std::to_string(open_offset),
                     open_offset);
  return doc;
}

std::string serialize_annotated(const AnnotatedDocument& doc) {
  for (const auto& v : validate_annotations(doc)) {
    if (v.kind == ViolationKind::PosMismatch || v.kind == ViolationKind::PosInvalidToken) continue;
    throw InvalidArgument("cannot serialize invalid document: " + v.message);
  }
  const std::u32string text = text::decode_utf8(doc.text);
  std::string out;
  out.reserve(doc.text.size() + doc.entities.size() * 24);
  std::size_t next = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (next > 0 && doc.entities[next - 1].end == i) {
      out += "</";
      out += to_string(doc.entities[next - 1].label);
      out += '>';
    }
    if (next < doc.entities.size() && doc.entities[next].start == i) {
      out += '<';
      out += to_string(doc.entities[next].label);
      out += '>';
      ++next;
    }
    if (i == text.size()) break;
    if (text[i] == U'<')
      out += "&lt;";
    else if (text[i] == U'&')
      out += "&amp;";
    else
      text::append_utf8(out, text[i]);
  }
  return out;
}

const PosTagset& PosTagset::default_set() {
  static const PosTagset set({"n", "v", "a", "d", "p", "m", "q", "r", "c", "u", "w"});
  return set;
}

PosTagset PosTagset::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tagset " + path.string());
  std::set<std::string> tags;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream words(line);
    std::string tag;
    while (words >> tag) tags.insert(tag);
  }
  if (tags.empty()) throw InvalidArgument("tagset " + path.string() + " is empty");
  return PosTagset(std::move(tags));
}

ValidationReport validate_annotations(const AnnotatedDocument& doc, const PosTagset& tagset) {
  ValidationReport report;
  const std::size_t length = text::code_point_length(doc.text);
  const auto& spans = doc.entities;

  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].start >= spans[i].end)
      report.push_back({ViolationKind::EmptySpan, {i},
                        "span " + std::to_string(i) + " " + describe(spans[i]) +
                            " has start >= end"});
    if (spans[i].end > length)
      report.push_back({ViolationKind::OutOfBounds, {i},
                        "span " + std::to_string(i) + " " + describe(spans[i]) +
                            " ends beyond text length " + std::to_string(length)});
    if (i > 0 && spans[i].start < spans[i - 1].start)
      report.push_back({ViolationKind::Unsorted, {i - 1, i},
                        "span " + std::to_string(i) + " starts before span " +
                            std::to_string(i - 1)});
  }
  for (std::size_t i = 0; i < spans.size(); ++i)
    for (std::size_t j = i + 1; j < spans.size(); ++j)
      if (spans[i].start < spans[j].end && spans[j].start < spans[i].end)
        report.push_back({ViolationKind::Overlap, {i, j},
                          "span " + std::to_string(i) + " " + describe(spans[i]) +
                              " overlaps span " + std::to_string(j) + " " +
                              describe(spans[j])});

  if (doc.pos_tokens) {
    std::string joined;
    for (std::size_t k = 0; k < doc.pos_tokens->size(); ++k) {
      const auto& tok = (*doc.pos_tokens)[k];
      if (!surface_ok(tok.surface))
        report.push_back({ViolationKind::PosInvalidToken, {k},
                          "pos token " + std::to_string(k) +
                              " has an empty surface or contains whitespace or '/'"});
      if (!tagset.contains(tok.tag))
        report.push_back({ViolationKind::PosInvalidToken, {k},
                          "pos token " + std::to_string(k) + " has unknown tag " + tok.tag});
      joined += tok.surface;
    }
    std::string squeezed;
    for (char32_t c : text::decode_utf8(doc.text))
      if (!text::is_whitespace(c)) text::append_utf8(squeezed, c);
    if (joined != squeezed)
      report.push_back({ViolationKind::PosMismatch, {},
                        "pos surfaces do not reconstruct the text"});
  }
  return report;
}

namespace {
bool is_offset(const Json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}
}  // namespace

ValidationReport validate_record(const Json& row, const PosTagset& tagset) {
  ValidationReport report;
  auto malformed = [&](const std::string& why) {
    report.push_back({ViolationKind::MalformedRecord, {}, why});
    return report;
  };
  if (!row.is_object()) return malformed("record is not an object");
  if (!row.contains("text") || !row["text"].is_string())
    return malformed("missing string field \"text\"");
  if (row.contains("doc_id") && !row["doc_id"].is_string())
    return malformed("\"doc_id\" must be a string");
  if (!row.contains("entities") || !row["entities"].is_array())
    return malformed("missing array field \"entities\"");

  AnnotatedDocument doc;
  doc.text = row["text"].get<std::string>();
  const auto& entities = row["entities"];
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto& e = entities[i];
    if (!e.is_object() || !e.contains("start") || !e.contains("end") || !e.contains("label") ||
        !is_offset(e["start"]) || !is_offset(e["end"]) ||
        !e["label"].is_string())
      return malformed("entity " + std::to_string(i) +
                       " needs non-negative integer start/end and a string label");
    const auto name = e["label"].get<std::string>();
    auto label = parse_label(name);
    if (!label)
      report.push_back({ViolationKind::UnknownLabel, {i},
                        "span " + std::to_string(i) + " has unknown label " + name});
    doc.entities.push_back({e["start"].get<std::size_t>(), e["end"].get<std::size_t>(),
                            label.value_or(EntityLabel::IchTitle)});
  }
  if (row.contains("pos") && !row["pos"].is_null()) {
    if (!row["pos"].is_array()) return malformed("\"pos\" must be an array or null");
    std::vector<PosToken> pos;
    for (const auto& pair : row["pos"]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
        return malformed("\"pos\" entries must be [surface, tag] string pairs");
      pos.push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
    }
    doc.pos_tokens = std::move(pos);
  }
  for (auto& v : validate_annotations(doc, tagset)) report.push_back(std::move(v));
  return report;
}

std::vector<std::pair<std::string, EntityLabel>> extract_entities(
    const AnnotatedDocument& doc, std::optional<EntityLabel> label_filter) {
  std::vector<std::pair<std::string, EntityLabel>> out;
  const std::u32string text = text::decode_utf8(doc.text);
  for (const auto& span : doc.entities) {
    if (label_filter && span.label != *label_filter) continue;
    const std::size_t end = std::min(span.end, text.size());
    const std::size_t start = std::min(span.start, end);
    out.emplace_back(text::encode_utf8(std::u32string_view(text).substr(start, end - start)),
                     span.label);
  }
  return out;
}

std::vector<PosToken> parse_pos_line(std::string_view line, const PosTagset& tagset) {
  std::vector<PosToken> tokens;
  std::vector<std::string> words;
  std::string current;
  for (char32_t c : text::decode_utf8(line)) {
    if (text::is_whitespace(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      text::append_utf8(current, c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));

  for (std::size_t k = 0; k < words.size(); ++k) {
    const std::string& w = words[k];
    const auto slash = w.find('/');
    if (slash == std::string::npos)
      throw ParseError("token " + std::to_string(k) + " \"" + w + "\" has no '/' separator", k);
    if (w.find('/', slash + 1) != std::string::npos)
      throw ParseError("token " + std::to_string(k) + " \"" + w + "\" has more than one '/'", k);
    PosToken tok{w.substr(0, slash), w.substr(slash + 1)};
    if (tok.surface.empty() || tok.tag.empty())
      throw ParseError("token " + std::to_string(k) + " \"" + w + "\" has an empty side", k);
    if (!tagset.contains(tok.tag))
      throw ParseError("unknown tag " + tok.tag + " at token " + std::to_string(k), k);
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::string format_pos_line(const std::vector<PosToken>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.surface;
    out += '/';
    out += t.tag;
  }
  return out;
}

Json to_json(const AnnotatedDocument& doc) {
  Json entities = Json::array();
  for (const auto& e : doc.entities)
    entities.push_back({{"start", e.start}, {"end", e.end}, {"label", to_string(e.label)}});
  Json pos = nullptr;
  if (doc.pos_tokens) {
    pos = Json::array();
    for (const auto& t : *doc.pos_tokens) pos.push_back({t.surface, t.tag});
  }
  return {{"doc_id", doc.doc_id}, {"text", doc.text}, {"entities", entities}, {"pos", pos}};
}

AnnotatedDocument annotated_from_json(const Json& row) {
  for (const auto& v : validate_record(row, PosTagset({}))) {
    if (v.kind == ViolationKind::MalformedRecord || v.kind == ViolationKind::UnknownLabel)
      throw Error("annotated record: " + v.message);
  }
  AnnotatedDocument doc;
  doc.doc_id = row.value("doc_id", std::string{});
  doc.text = row["text"].get<std::string>();
  for (const auto& e : row["entities"])
    doc.entities.push_back({e["start"].get<std::size_t>(), e["end"].get<std::size_t>(),
                            *parse_label(e["label"].get<std::string>())});
  if (row.contains("pos") && !row["pos"].is_null()) {
    std::vector<PosToken> pos;
    for (const auto& pair : row["pos"])
      pos.push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
    doc.pos_tokens = std::move(pos);
  }
  return doc;
}

}  // namespace forge::annotation
