#pragma once

// Line-oriented helpers shared by the plain-text input parsers.

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "evgrid/types.hpp"

namespace evgrid::detail {

std::string read_file(const std::filesystem::path& path);

struct Row {
  int number;  // 1-based line number in the source
  std::vector<std::string_view> fields;
};

/// Splits on whitespace (and commas when `commas` is set), dropping '#' comments and blank lines.
std::vector<Row> tokenize(std::string_view text, bool commas = false);

double parse_double(std::string_view s, const std::string& source, int row, std::string_view what);
int parse_int(std::string_view s, const std::string& source, int row, std::string_view what);

}  // namespace evgrid::detail
