// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace forge::jsonl {

using Json = nlohmann::json;

struct LineError {
  std::size_t line_number = 0;  // 1-based
  std::string message;
};

/// Calls `fn` for every non-blank line that parses as JSON. Lines that fail to
/// parse are collected and returned instead of thrown. Throws IoError when the
/// file cannot be opened.
std::vector<LineError> for_each(const std::filesystem::path& path,
                                const std::function<void(const Json&, std::size_t)>& fn);

/// Writes one compact JSON document per line with LF endings.
void write(const std::filesystem::path& path, const std::vector<Json>& rows);

std::string dump_line(const Json& row);

}  // namespace forge::jsonl
