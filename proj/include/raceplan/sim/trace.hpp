#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace raceplan::sim {

inline constexpr std::string_view kTraceHeader =
    "t_s,ego_s_m,ego_l_m,ego_v_mps,primitive,n_candidates,cycle_ms,lead_s_m,lead_l_m";

struct TraceRecord {
  double t = 0.0;
  double ego_s = 0.0;
  double ego_l = 0.0;
  double ego_v = 0.0;
  std::string primitive;  // "none" when the cycle was degraded
  int n_candidates = 0;
  double cycle_ms = 0.0;
  std::optional<double> lead_s;
  std::optional<double> lead_l;

  bool operator==(const TraceRecord&) const = default;
};

std::string format_trace(const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> parse_trace(std::string_view text, const std::string& source = "<memory>");
void write_trace(const std::vector<TraceRecord>& trace, const std::filesystem::path& path);
std::vector<TraceRecord> read_trace(const std::filesystem::path& path);

}  // namespace raceplan::sim
