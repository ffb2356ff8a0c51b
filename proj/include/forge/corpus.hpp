// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace forge::corpus {

enum class SourceCategory {
  PoliciesRegulations,
  NewsThematicReports,
  AcademicResources,
  ProjectInventory,
  JournalAbstracts,
};

inline constexpr std::array<SourceCategory, 5> kAllCategories = {
    SourceCategory::PoliciesRegulations, SourceCategory::NewsThematicReports,
    SourceCategory::AcademicResources, SourceCategory::ProjectInventory,
    SourceCategory::JournalAbstracts};

std::string_view to_string(SourceCategory category);
std::optional<SourceCategory> parse_category(std::string_view name);

struct Document {
  std::string id;
  SourceCategory category = SourceCategory::PoliciesRegulations;
  std::string text;
  std::string source_path;
  std::uint64_t token_count = 0;

  bool operator==(const Document&) const = default;
};

// ---------------------------------------------------------------------------
// Ingestion

enum class IngestFormat { PlainText, Jsonl };

std::optional<IngestFormat> parse_ingest_format(std::string_view name);

struct IngestDiagnostic {
  std::string source_path;
  std::size_t line = 0;
  std::string message;
};

struct IngestReport {
  std::size_t files_read = 0;
  std::size_t records = 0;
  std::vector<IngestDiagnostic> skipped;
};

struct IngestResult {
  std::vector<Document> documents;
  IngestReport report;
};

/// Reads raw documents under `root`.
///
/// PlainText: every regular `*.txt` file below `root` (recursive, sorted by
/// path) becomes one document. Jsonl: `root` is either a `.jsonl` file or a
/// directory whose `*.jsonl` files are read in path order; each line must be
/// an object with a string `text` field. Malformed lines are skipped and
/// listed in the report.
///
/// Ids are `<source_path>#<record index>` so re-ingesting the same tree yields
/// the same ids. Text is returned raw; call clean_documents() next.
///
/// Throws IoError if `root` does not exist or a file cannot be read.
IngestResult ingest_documents(const std::filesystem::path& root, SourceCategory category,
                              IngestFormat format);

// ---------------------------------------------------------------------------
// Cleaning and token counting

/// Applies the fixed cleaning rules, in order:
///   1. full-width digits and Latin letters (U+FF10-FF19, FF21-FF3A, FF41-FF5A)
///      map to ASCII; CJK punctuation is left alone
///   2. control characters are removed, except the whitespace controls
///      (tab, LF, VT, FF, CR, NEL) which fall through to rule 4
///   3. tags of known HTML elements (`<p>`, `</div>`, `<br/>`, `<a href=..>`)
///      are replaced by a space, repeated until none remain
///   4. whitespace runs collapse to one space; leading/trailing space is trimmed
///   5. NFC normalization
/// The result is idempotent. An empty result means the document should be
/// dropped.
std::string clean_text(std::string_view raw);

/// CJK code point = 1 token, maximal ASCII alphanumeric run = 1 token, any
/// other non-whitespace code point = 1 token.
std::uint64_t count_tokens(std::string_view text);

struct CleanResult {
  std::vector<Document> documents;
  std::vector<std::string> dropped_ids;  // empty after cleaning
};

/// Cleans every document and sets token_count. Work is split across
/// `threads` workers (0 = hardware concurrency); output keeps input order.
CleanResult clean_documents(std::vector<Document> documents, unsigned threads = 0);

// ---------------------------------------------------------------------------
// Statistics

struct CategoryStats {
  SourceCategory category = SourceCategory::PoliciesRegulations;
  std::uint64_t num_tokens = 0;
  std::uint64_t num_texts = 0;
  double avg_length = 0.0;
  std::uint64_t max_length = 0;
  std::uint64_t min_length = 0;
};

/// One row per category present, in SourceCategory order.
using CorpusStats = std::vector<CategoryStats>;

/// Per-text length observation. Lets callers compute statistics from counts
/// alone, without materializing the texts.
struct LengthRecord {
  SourceCategory category;
  std::uint64_t tokens;
};

CorpusStats compute_stats(std::span<const Document> documents);
CorpusStats compute_stats(std::span<const LengthRecord> lengths);

enum class StatsFormat { Table, Csv, Json };
std::optional<StatsFormat> parse_stats_format(std::string_view name);

/// Averages are rendered with two decimals in every format.
std::string render_stats(const CorpusStats& stats, StatsFormat format);

// ---------------------------------------------------------------------------
// Deduplication

struct DuplicatePair {
  std::string kept_id;
  std::string dropped_id;

  bool operator==(const DuplicatePair&) const = default;
};

struct DedupResult {
  std::vector<Document> documents;
  std::vector<DuplicatePair> removed;
};

/// Exact-text deduplication. The first occurrence wins and order is kept.
DedupResult deduplicate(std::vector<Document> documents);

// ---------------------------------------------------------------------------
// Corpus JSONL

nlohmann::json to_json(const Document& doc);
Document document_from_json(const nlohmann::json& row);

/// Throws Error on the first malformed line; corpus files are produced by
/// this toolkit and are expected to be well-formed.
std::vector<Document> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, std::span<const Document> documents);

}  // namespace forge::corpus
