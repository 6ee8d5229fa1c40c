#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace raceplan::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column index by name, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
  double number(const Row& row, std::size_t col) const;
};

/// Comma-separated, header row required, blank and `#` lines skipped, fields trimmed.
Table parse(std::string_view text, const std::string& source);

std::string read_file(const std::filesystem::path& path);

double parse_double(std::string_view field, const std::string& source, std::size_t line);

/// Shortest representation that reads back to the identical double.
std::string format_double(double v);

}  // namespace raceplan::csv
