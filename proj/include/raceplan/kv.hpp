#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace raceplan::kv {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

/// One `[name]` block of `key = value` lines. Entries before the first header
/// land in a section with an empty name.
struct Section {
  std::string source;
  std::string name;
  std::size_t line = 0;
  std::vector<std::pair<std::string, Entry>> entries;

  const Entry* find(std::string_view key) const;
  bool has(std::string_view key) const { return find(key) != nullptr; }
  double number(std::string_view key) const;
  double number(std::string_view key, double fallback) const;
  std::string text(std::string_view key) const;
  std::string text(std::string_view key, std::string fallback) const;
  /// Throws ParseError for keys outside `allowed`.
  void restrict_keys(std::initializer_list<std::string_view> allowed) const;
};

/// `#` starts a comment; blank lines are skipped.
std::vector<Section> parse(std::string_view text, const std::string& source);

}  // namespace raceplan::kv
