// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include "forge/jsonl.hpp"

#include <fstream>

#include "forge/error.hpp"

namespace forge::jsonl {

std::vector<LineError> for_each(const std::filesystem::path& path,
                                const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<LineError> errors;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json row;
    try {
      row = Json::parse(line);
    } catch (const Json::parse_error& e) {
      errors.push_back({line_number, e.what()});
      continue;
    }
    fn(row, line_number);
  }
  if (in.bad()) throw IoError("read failed on " + path.string());
  return errors;
}

std::string dump_line(const Json& row) {
  return row.dump(-1, ' ', false, Json::error_handler_t::replace);
}

void write(const std::filesystem::path& path, const std::vector<Json>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& row : rows) out << dump_line(row) << '\n';
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace forge::jsonl
