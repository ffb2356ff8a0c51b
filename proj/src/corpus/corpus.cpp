// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include "forge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "forge/error.hpp"
#include "forge/jsonl.hpp"

namespace forge::corpus {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr std::string_view kCategoryNames[] = {
    "PoliciesRegulations", "NewsThematicReports", "AcademicResources", "ProjectInventory",
    "JournalAbstracts"};

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::vector<fs::path> files_with_extension(const fs::path& root, std::string_view ext) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(root, ec), end; it != end; it.increment(ec)) {
    if (ec) throw IoError("cannot traverse " + root.string() + ": " + ec.message());
    if (it->is_regular_file() && lower_extension(it->path()) == ext) files.push_back(it->path());
  }
  if (ec) throw IoError("cannot traverse " + root.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path.string());
  return buf.str();
}

std::string make_id(const std::string& source_path, std::size_t index) {
  return source_path + "#" + std::to_string(index);
}

void ingest_jsonl_file(const fs::path& file, SourceCategory category, IngestResult& result) {
  const std::string source = file.string();
  ++result.report.files_read;
  const std::size_t first_skip = result.report.skipped.size();
  auto errors = jsonl::for_each(file, [&](const Json& row, std::size_t line) {
    if (!row.is_object() || !row.contains("text") || !row["text"].is_string()) {
      result.report.skipped.push_back({source, line, "missing string field \"text\""});
      return;
    }
    Document doc;
    doc.id = make_id(source, line - 1);
    doc.category = category;
    doc.text = row["text"].get<std::string>();
    doc.source_path = source;
    result.documents.push_back(std::move(doc));
    ++result.report.records;
  });
  for (auto& e : errors) result.report.skipped.push_back({source, e.line_number, e.message});
  std::stable_sort(result.report.skipped.begin() + static_cast<std::ptrdiff_t>(first_skip),
                   result.report.skipped.end(),
                   [](const auto& a, const auto& b) { return a.line < b.line; });
}

void accumulate(std::vector<CategoryStats>& rows, std::array<bool, 5>& seen, SourceCategory cat,
                std::uint64_t tokens) {
  const auto idx = static_cast<std::size_t>(cat);
  CategoryStats& row = rows[idx];
  if (!seen[idx]) {
    seen[idx] = true;
    row.category = cat;
    row.min_length = tokens;
    row.max_length = tokens;
  }
  row.num_tokens += tokens;
  ++row.num_texts;
  row.max_length = std::max(row.max_length, tokens);
  row.min_length = std::min(row.min_length, tokens);
}

CorpusStats finish(std::vector<CategoryStats> rows, const std::array<bool, 5>& seen) {
  CorpusStats out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!seen[i]) continue;
    rows[i].avg_length =
        static_cast<double>(rows[i].num_tokens) / static_cast<double>(rows[i].num_texts);
    out.push_back(rows[i]);
  }
  return out;
}

std::string two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string_view to_string(SourceCategory category) {
  return kCategoryNames[static_cast<std::size_t>(category)];
}

std::optional<SourceCategory> parse_category(std::string_view name) {
  for (auto c : kAllCategories)
    if (to_string(c) == name) return c;
  return std::nullopt;
}

std::optional<IngestFormat> parse_ingest_format(std::string_view name) {
  if (name == "plain" || name == "plain-text-per-file") return IngestFormat::PlainText;
  if (name == "jsonl") return IngestFormat::Jsonl;
  return std::nullopt;
}

IngestResult ingest_documents(const fs::path& root, SourceCategory category, IngestFormat format) {
  std::error_code ec;
  if (!fs::exists(root, ec)) throw IoError("no such path: " + root.string());

  IngestResult result;
  if (format == IngestFormat::PlainText) {
    std::vector<fs::path> files;
    if (fs::is_regular_file(root))
      files.push_back(root);
    else
      files = files_with_extension(root, ".txt");
    for (const auto& file : files) {
      Document doc;
      doc.source_path = file.string();
      doc.id = make_id(doc.source_path, 0);
      doc.category = category;
      doc.text = read_file(file);
      result.documents.push_back(std::move(doc));
      ++result.report.files_read;
      ++result.report.records;
    }
    return result;
  }

  if (fs::is_regular_file(root)) {
    ingest_jsonl_file(root, category, result);
  } else {
    for (const auto& file : files_with_extension(root, ".jsonl"))
      ingest_jsonl_file(file, category, result);
  }
  return result;
}

CleanResult clean_documents(std::vector<Document> documents, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(1, documents.size() / 64)));

  auto work = [&documents](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      documents[i].text = clean_text(documents[i].text);
      documents[i].token_count = count_tokens(documents[i].text);
    }
  };
  if (threads <= 1) {
    work(0, documents.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (documents.size() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < documents.size(); begin += chunk)
      pool.emplace_back(work, begin, std::min(documents.size(), begin + chunk));
  }

  CleanResult result;
  result.documents.reserve(documents.size());
  for (auto& doc : documents) {
    if (doc.text.empty())
      result.dropped_ids.push_back(doc.id);
    else
      result.documents.push_back(std::move(doc));
  }
  return result;
}

CorpusStats compute_stats(std::span<const Document> documents) {
  std::vector<CategoryStats> rows(kAllCategories.size());
  std::array<bool, 5> seen{};
  for (const auto& doc : documents) accumulate(rows, seen, doc.category, doc.token_count);
  return finish(std::move(rows), seen);
}

CorpusStats compute_stats(std::span<const LengthRecord> lengths) {
  std::vector<CategoryStats> rows(kAllCategories.size());
  std::array<bool, 5> seen{};
  for (const auto& rec : lengths) accumulate(rows, seen, rec.category, rec.tokens);
  return finish(std::move(rows), seen);
}

std::optional<StatsFormat> parse_stats_format(std::string_view name) {
  if (name == "table") return StatsFormat::Table;
  if (name == "csv") return StatsFormat::Csv;
  if (name == "json") return StatsFormat::Json;
  return std::nullopt;
}

std::string render_stats(const CorpusStats& stats, StatsFormat format) {
  std::ostringstream out;
  switch (format) {
    case StatsFormat::Table:
      out << std::left << std::setw(22) << "Category" << std::right << std::setw(15)
          << "Num of tokens" << std::setw(14) << "Num of texts" << std::setw(13) << "Avg. length"
          << std::setw(12) << "Max length" << std::setw(12) << "Min length" << '\n';
      for (const auto& r : stats)
        out << std::left << std::setw(22) << to_string(r.category) << std::right << std::setw(15)
            << r.num_tokens << std::setw(14) << r.num_texts << std::setw(13)
            << two_decimals(r.avg_length) << std::setw(12) << r.max_length << std::setw(12)
            << r.min_length << '\n';
      break;
    case StatsFormat::Csv:
      out << "category,num_tokens,num_texts,avg_length,max_length,min_length\n";
      for (const auto& r : stats)
        out << to_string(r.category) << ',' << r.num_tokens << ',' << r.num_texts << ','
            << two_decimals(r.avg_length) << ',' << r.max_length << ',' << r.min_length << '\n';
      break;
    case StatsFormat::Json: {
      Json rows = Json::array();
      for (const auto& r : stats)
        rows.push_back({{"category", to_string(r.category)},
                        {"num_tokens", r.num_tokens},
                        {"num_texts", r.num_texts},
                        {"avg_length", std::stod(two_decimals(r.avg_length))},
                        {"max_length", r.max_length},
                        {"min_length", r.min_length}});
      out << rows.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

DedupResult deduplicate(std::vector<Document> documents) {
  DedupResult result;
  std::unordered_map<std::string, std::string> first_id_by_text;
  first_id_by_text.reserve(documents.size());
  for (auto& doc : documents) {
    auto [it, inserted] = first_id_by_text.try_emplace(doc.text, doc.id);
    if (inserted)
      result.documents.push_back(std::move(doc));
    else
      result.removed.push_back({it->second, doc.id});
  }
  return result;
}

Json to_json(const Document& doc) {
  return {{"id", doc.id},
          {"category", to_string(doc.category)},
          {"text", doc.text},
          {"source_path", doc.source_path},
          {"token_count", doc.token_count}};
}

Document document_from_json(const Json& row) {
  try {
    Document doc;
    doc.id = row.at("id").get<std::string>();
    const auto cat = row.at("category").get<std::string>();
    auto parsed = parse_category(cat);
    if (!parsed) throw Error("unknown category " + cat);
    doc.category = *parsed;
    doc.text = row.at("text").get<std::string>();
    doc.source_path = row.value("source_path", std::string{});
    doc.token_count = row.contains("token_count") ? row["token_count"].get<std::uint64_t>()
                                                  : count_tokens(doc.text);
    return doc;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed corpus record: ") + e.what());
  }
}

std::vector<Document> read_corpus(const fs::path& path) {
  std::vector<Document> docs;
  auto errors = jsonl::for_each(path, [&](const Json& row, std::size_t line) {
    try {
      docs.push_back(document_from_json(row));
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  if (!errors.empty())
    throw Error(path.string() + ":" + std::to_string(errors.front().line_number) +
                ": invalid JSON");
  return docs;
}

void write_corpus(const fs::path& path, std::span<const Document> documents) {
  std::vector<Json> rows;
  rows.reserve(documents.size());
  for (const auto& d : documents) rows.push_back(to_json(d));
  jsonl::write(path, rows);
}

}  // namespace forge::corpus
