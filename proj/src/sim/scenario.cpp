#include "raceplan/sim/scenario.hpp"

#include "raceplan/csv.hpp"
#include "raceplan/errors.hpp"
#include "raceplan/kv.hpp"

namespace raceplan::sim {

namespace {

constexpr double kKmh = 1.0 / 3.6;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void positive(const kv::Section& sec, std::string_view key, double v) {
  if (!(v > 0.0)) {
    const auto* e = sec.find(key);
    throw ParseError(sec.source, e ? e->line : sec.line, std::string(key) + " must be positive");
  }
}

ZoneSpec parse_zone(const kv::Section& sec) {
  sec.restrict_keys({"s_start", "s_end", "side", "l_inner", "trigger", "lead_l"});
  ZoneSpec z;
  z.s_start = sec.number("s_start");
  z.s_end = sec.number("s_end");
  const auto side = sec.text("side");
  if (side == "left") {
    z.side = Side::kLeft;
  } else if (side == "right") {
    z.side = Side::kRight;
  } else {
    throw ParseError(sec.source, sec.find("side")->line, "side must be left or right");
  }
  z.l_inner = sec.number("l_inner", 0.0);
  const auto trig = sec.text("trigger", "time:0");
  const auto colon = trig.find(':');
  const auto line = sec.has("trigger") ? sec.find("trigger")->line : sec.line;
  if (colon == std::string::npos) throw ParseError(sec.source, line, "trigger must be time:<s> or gap:<m>");
  const auto kind = trig.substr(0, colon);
  if (kind == "time") {
    z.trigger = TriggerKind::kTime;
  } else if (kind == "gap") {
    z.trigger = TriggerKind::kGap;
  } else {
    throw ParseError(sec.source, line, "unknown trigger kind '" + kind + "'");
  }
  z.trigger_value = csv::parse_double(trig.substr(colon + 1), sec.source, line);
  if (sec.has("lead_l")) z.lead_l = sec.number("lead_l");
  return z;
}

void parse_planner(const kv::Section& sec, PlannerConfig& cfg) {
  sec.restrict_keys({"a_lat_max", "a_lon_max_acc", "a_lon_max_dec", "d_min", "t_gap", "kp", "kd", "t_calc",
                     "plan_margin", "prediction_time"});
  auto& f = cfg.friction;
  f.a_lat_max = sec.number("a_lat_max", f.a_lat_max);
  f.a_lon_max_acc = sec.number("a_lon_max_acc", f.a_lon_max_acc);
  f.a_lon_max_dec = sec.number("a_lon_max_dec", f.a_lon_max_dec);
  auto& fo = cfg.follow;
  fo.d_min = sec.number("d_min", fo.d_min);
  fo.t_gap = sec.number("t_gap", fo.t_gap);
  fo.kp = sec.number("kp", fo.kp);
  fo.kd = sec.number("kd", fo.kd);
  cfg.t_calc = sec.number("t_calc", cfg.t_calc);
  cfg.plan_margin = sec.number("plan_margin", cfg.plan_margin);
  cfg.prediction_time = sec.number("prediction_time", cfg.prediction_time);
  positive(sec, "a_lat_max", f.a_lat_max);
  positive(sec, "a_lon_max_acc", f.a_lon_max_acc);
  positive(sec, "a_lon_max_dec", f.a_lon_max_dec);
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& source, const std::filesystem::path& base_dir) {
  Scenario sc;
  bool have_scenario = false;
  bool have_ego = false;
  for (const auto& sec : kv::parse(text, source)) {
    if (sec.name.empty()) {
      if (!sec.entries.empty()) throw ParseError(source, sec.entries.front().second.line, "entry outside a section");
    } else if (sec.name == "scenario") {
      have_scenario = true;
      sec.restrict_keys({"name", "raceline", "track", "graph", "params", "friction", "duration", "period", "horizon",
                         "plot_spacing", "overtake_policy"});
      sc.name = sec.text("name", "");
      sc.raceline = resolve(base_dir, sec.text("raceline"));
      sc.track = resolve(base_dir, sec.text("track", ""));
      sc.graph = resolve(base_dir, sec.text("graph", ""));
      sc.params = resolve(base_dir, sec.text("params", ""));
      sc.friction = resolve(base_dir, sec.text("friction", ""));
      sc.duration = sec.number("duration", sc.duration);
      sc.period = sec.number("period", sc.period);
      sc.horizon = sec.number("horizon", sc.horizon);
      sc.plot_spacing = sec.number("plot_spacing", sc.plot_spacing);
      positive(sec, "duration", sc.duration);
      positive(sec, "period", sc.period);
      positive(sec, "horizon", sc.horizon);
      positive(sec, "plot_spacing", sc.plot_spacing);
      const auto pol = sec.text("overtake_policy", "always");
      if (pol == "always") {
        sc.overtake_policy = OvertakePolicy::kAlways;
      } else if (pol == "zone_only") {
        sc.overtake_policy = OvertakePolicy::kZoneOnly;
      } else {
        throw ParseError(source, sec.find("overtake_policy")->line, "overtake_policy must be always or zone_only");
      }
    } else if (sec.name == "ego") {
      have_ego = true;
      sec.restrict_keys({"s", "l", "v_kmh", "v_cap_kmh"});
      sc.ego_s = sec.number("s", 0.0);
      sc.ego_l = sec.number("l", 0.0);
      sc.ego_v = sec.number("v_kmh", 0.0) * kKmh;
      sc.ego_v_cap = sec.number("v_cap_kmh") * kKmh;
      positive(sec, "v_cap_kmh", sc.ego_v_cap);
      if (sc.ego_v < 0.0) throw ParseError(source, sec.find("v_kmh")->line, "v_kmh must not be negative");
    } else if (sec.name == "lead") {
      if (sc.lead) throw ParseError(source, sec.line, "only one lead vehicle is supported");
      sec.restrict_keys({"s", "l", "v_kmh", "v_cap_kmh"});
      LeadSpec lead;
      lead.s = sec.number("s");
      lead.l = sec.number("l", 0.0);
      lead.v_cap = sec.number("v_cap_kmh") * kKmh;
      lead.v = sec.number("v_kmh", lead.v_cap / kKmh) * kKmh;
      positive(sec, "v_cap_kmh", lead.v_cap);
      sc.lead = lead;
    } else if (sec.name == "obstacle") {
      sec.restrict_keys({"x", "y", "s", "l", "r"});
      ObstacleSpec o;
      o.r = sec.number("r");
      positive(sec, "r", o.r);
      if (sec.has("s") || sec.has("l")) {
        if (sec.has("x") || sec.has("y")) throw ParseError(source, sec.line, "obstacle needs either x/y or s/l");
        o.frenet = FrenetPoint{sec.number("s"), sec.number("l")};
      } else {
        o.x = sec.number("x");
        o.y = sec.number("y");
      }
      sc.obstacles.push_back(o);
    } else if (sec.name == "zone") {
      sc.zones.push_back(parse_zone(sec));
    } else if (sec.name == "planner") {
      parse_planner(sec, sc.planner);
    } else {
      throw ParseError(source, sec.line, "unknown section [" + sec.name + "]");
    }
  }
  if (!have_scenario) throw ParseError(source, 1, "missing [scenario] section");
  if (!have_ego) throw ParseError(source, 1, "missing [ego] section");
  sc.planner.friction.v_cap = sc.ego_v_cap;
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(csv::read_file(path), path.string(), path.parent_path());
}

}  // namespace raceplan::sim
