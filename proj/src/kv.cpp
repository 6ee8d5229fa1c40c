#include "raceplan/kv.hpp"

#include <algorithm>

#include "raceplan/csv.hpp"
#include "raceplan/errors.hpp"

namespace raceplan::kv {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const Entry* Section::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

double Section::number(std::string_view key) const {
  const auto* e = find(key);
  if (!e) throw ParseError(source, line, "[" + name + "] missing key '" + std::string(key) + "'");
  return csv::parse_double(e->value, source, e->line);
}

double Section::number(std::string_view key, double fallback) const {
  const auto* e = find(key);
  return e ? csv::parse_double(e->value, source, e->line) : fallback;
}

std::string Section::text(std::string_view key) const {
  const auto* e = find(key);
  if (!e) throw ParseError(source, line, "[" + name + "] missing key '" + std::string(key) + "'");
  return e->value;
}

std::string Section::text(std::string_view key, std::string fallback) const {
  const auto* e = find(key);
  return e ? e->value : std::move(fallback);
}

void Section::restrict_keys(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [k, v] : entries) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ParseError(source, v.line, "unknown key '" + k + "'" + (name.empty() ? "" : " in [" + name + "]"));
    }
  }
}

std::vector<Section> parse(std::string_view text, const std::string& source) {
  std::vector<Section> out;
  out.push_back({source, "", 0, {}});
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source, line_no, "malformed section header");
      out.push_back({source, std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    if (out.back().has(key)) throw ParseError(source, line_no, "duplicate key '" + std::string(key) + "'");
    out.back().entries.emplace_back(std::string(key), Entry{std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

}  // namespace raceplan::kv
