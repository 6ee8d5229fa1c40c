#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "raceplan/online_planner.hpp"

namespace raceplan::sim {

struct ObstacleSpec {
  double x = 0.0;
  double y = 0.0;
  double r = 1.0;
  std::optional<FrenetPoint> frenet;  // given as s/l; resolved against the race line
};

struct LeadSpec {
  double s = 0.0;
  double l = 0.0;
  double v = 0.0;      // initial [m/s]
  double v_cap = 0.0;  // [m/s]
};

enum class TriggerKind { kTime, kGap };

/// Regulation zone: the strip [s_start, s_end] between the track bound on
/// `side` and l_inner becomes a blocker once triggered; the lead then moves
/// to lead_l (if given).
struct ZoneSpec {
  double s_start = 0.0;
  double s_end = 0.0;
  Side side = Side::kRight;
  double l_inner = 0.0;
  TriggerKind trigger = TriggerKind::kTime;
  double trigger_value = 0.0;  // [s] or ego-to-lead gap [m]
  std::optional<double> lead_l;
};

enum class OvertakePolicy { kAlways, kZoneOnly };

struct Scenario {
  std::string name;
  std::filesystem::path raceline;
  std::filesystem::path track;     // optional, bounds source
  std::filesystem::path graph;     // optional, prebuilt lattice
  std::filesystem::path params;    // optional graph params
  std::filesystem::path friction;  // optional friction scale map
  double duration = 30.0;          // [s]
  double period = 0.1;             // planner period [s]
  double horizon = 200.0;          // [m]
  double plot_spacing = 1.0;       // [s] between plotted position samples
  OvertakePolicy overtake_policy = OvertakePolicy::kAlways;

  double ego_s = 0.0;
  double ego_l = 0.0;
  double ego_v = 0.0;
  double ego_v_cap = 0.0;  // [m/s]

  std::vector<ObstacleSpec> obstacles;
  std::optional<LeadSpec> lead;
  std::vector<ZoneSpec> zones;

  PlannerConfig planner;
};

/// Sectioned `key = value` text, see README. Relative paths resolve against `base_dir`.
Scenario parse_scenario(std::string_view text, const std::string& source, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace raceplan::sim
