// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forge/error.hpp"

namespace forge::annotation {

enum class EntityLabel { IchTitle, IchPlace, IchTerm };

/// "ICH-TITLE", "ICH-PLACE", "ICH-TERM".
std::string_view to_string(EntityLabel label);
std::optional<EntityLabel> parse_label(std::string_view name);

/// Half-open span [start, end) in code points of the owning text.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityLabel label = EntityLabel::IchTitle;

  bool operator==(const EntitySpan&) const = default;
};

struct PosToken {
  std::string surface;
  std::string tag;

  bool operator==(const PosToken&) const = default;
};

struct AnnotatedDocument {
  std::string doc_id;
  std::string text;
  std::vector<EntitySpan> entities;
  std::optional<std::vector<PosToken>> pos_tokens;

  bool operator==(const AnnotatedDocument&) const = default;
};

/// Raised by the markup and POS parsers. `offset` is a byte offset into the
/// input for markup errors and a token index for POS errors.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses inline markup such as `<ICH-TITLE>苗族古歌</ICH-TITLE>流传于...`.
/// Tags may not nest; `&lt;` and `&amp;` are the only escapes, and a bare
/// `&` or `<` that does not start one is an error.
AnnotatedDocument parse_annotated_text(std::string_view markup, std::string doc_id = {});

/// Inverse of parse_annotated_text. Throws InvalidArgument if the document
/// fails validation. POS tokens and doc_id are not part of the markup.
std::string serialize_annotated(const AnnotatedDocument& doc);

enum class ViolationKind {
  Overlap,
  OutOfBounds,
  EmptySpan,
  Unsorted,
  UnknownLabel,
  MalformedRecord,
  PosMismatch,
  PosInvalidToken,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::vector<std::size_t> spans;  // indices into entities (or pos tokens)
  std::string message;
};

using ValidationReport = std::vector<Violation>;

class PosTagset {
 public:
  /// n v a d p m q r c u w
  static const PosTagset& default_set();
  /// Whitespace-separated tags; `#` starts a comment line.
  static PosTagset load(const std::filesystem::path& path);

  explicit PosTagset(std::set<std::string> tags) : tags_(std::move(tags)) {}
  bool contains(std::string_view tag) const { return tags_.contains(std::string(tag)); }
  const std::set<std::string>& tags() const { return tags_; }

 private:
  std::set<std::string> tags_;
};

ValidationReport validate_annotations(const AnnotatedDocument& doc,
                                      const PosTagset& tagset = PosTagset::default_set());

/// Validates one annotated-corpus JSONL record before it is decoded, so that
/// schema problems such as unknown labels are reported rather than thrown.
ValidationReport validate_record(const nlohmann::json& row,
                                 const PosTagset& tagset = PosTagset::default_set());

std::vector<std::pair<std::string, EntityLabel>> extract_entities(
    const AnnotatedDocument& doc, std::optional<EntityLabel> label_filter = std::nullopt);

/// Parses `surface/tag surface/tag ...`.
std::vector<PosToken> parse_pos_line(std::string_view line,
                                     const PosTagset& tagset = PosTagset::default_set());

std::string format_pos_line(const std::vector<PosToken>& tokens);

nlohmann::json to_json(const AnnotatedDocument& doc);
/// Throws Error on schema problems; use validate_record() for a report.
AnnotatedDocument annotated_from_json(const nlohmann::json& row);

}  // namespace forge::annotation
