// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <cctype>
#include <sstream>

#include "forge/bench.hpp"
#include "forge/error.hpp"

namespace forge::bench {

namespace {

constexpr std::size_t kColumns = std::size(metrics::kColumnNames);

const TaskResult* find_task(const ModelResult& m, instruct::TaskKind task) {
  for (const auto& t : m.tasks)
    if (t.task == task) return &t;
  return nullptr;
}

std::string markdown_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_markdown(const BenchmarkResult& result) {
  std::ostringstream out;
  bool first_table = true;
  for (auto task : result.tasks) {
    std::vector<std::pair<const ModelResult*, const TaskResult*>> rows;
    for (const auto& m : result.models)
      if (const TaskResult* t = m.skipped ? nullptr : find_task(m, task)) rows.emplace_back(&m, t);

    // Best value per column, compared on the rendered text so ties after
    // rounding are all bolded.
    std::vector<double> best(kColumns, -1.0);
    for (const auto& [m, t] : rows) {
      const auto v = t->report.values();
      for (std::size_t c = 0; c < kColumns; ++c)
        best[c] = std::max(best[c], std::stod(metrics::format_percent(v[c])));
    }

    if (!first_table) out << '\n';
    first_table = false;
    out << "## " << instruct::display_name(task) << "\n\n| Model |";
    for (const char* col : metrics::kColumnNames) out << ' ' << col << " |";
    out << "\n| --- |";
    for (std::size_t c = 0; c < kColumns; ++c) out << " ---: |";
    out << '\n';
    for (const auto& [m, t] : rows) {
      out << "| " << markdown_cell(m->name) << " |";
      const auto v = t->report.values();
      for (std::size_t c = 0; c < kColumns; ++c) {
        const auto cell = metrics::format_percent(v[c]);
        if (std::stod(cell) == best[c])
          out << " **" << cell << "** |";
        else
          out << ' ' << cell << " |";
      }
      out << '\n';
    }
    for (const auto& [m, t] : rows)
      if (t->failures > 0)
        out << "\nFailed requests for " << markdown_cell(m->name) << ": " << t->failures << " of "
            << t->samples.size() << " samples scored as empty.\n";
  }
  bool any_skipped = false;
  for (const auto& m : result.models) {
    if (!m.skipped) continue;
    if (!any_skipped) out << "\n## Skipped endpoints\n\n";
    any_skipped = true;
    out << "- " << markdown_cell(m.name) << ": " << m.skip_reason << '\n';
  }
  return out.str();
}

std::string render_csv(const BenchmarkResult& result) {
  std::ostringstream out;
  out << "task,model";
  for (const char* col : metrics::kColumnNames) out << ',' << col;
  out << "\r\n";
  for (auto task : result.tasks)
    for (const auto& m : result.models) {
      const TaskResult* t = m.skipped ? nullptr : find_task(m, task);
      if (!t) continue;
      out << csv_field(instruct::to_string(task)) << ',' << csv_field(m.name);
      for (double v : t->report.values()) out << ',' << metrics::format_percent(v);
      out << "\r\n";
    }
  return out.str();
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view raw) {
  std::string name(raw);
  for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  return std::nullopt;
}

std::string render_report(const BenchmarkResult& result, ReportFormat format) {
  if (result.models.empty() || result.tasks.empty())
    throw InvalidArgument("cannot render an empty benchmark result");
  switch (format) {
    case ReportFormat::Markdown: return render_markdown(result);
    case ReportFormat::Csv: return render_csv(result);
    case ReportFormat::Json: return to_json(result).dump(2) + "\n";
  }
  throw InvalidArgument("unknown report format");
}

}  // namespace forge::bench
