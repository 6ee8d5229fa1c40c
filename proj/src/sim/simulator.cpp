#include "raceplan/sim/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "raceplan/csv.hpp"
#include "raceplan/errors.hpp"
#include "raceplan/graph_io.hpp"
#include "raceplan/sim/track_gen.hpp"

namespace raceplan::sim {

namespace {

constexpr double kSweepDt = 0.01;
constexpr double kInterpSlack = 1e-3;
// zone grid pitch; the circles reach pitch/sqrt(2) past the zone edge
constexpr double kZonePitch = 1.0;

struct EgoState {
  double s = 0.0;
  double l = 0.0;
  double v = 0.0;
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double kappa = 0.0;
  double arc = 0.0;  // distance driven along the trajectory
};

// Pose and speed on a trajectory after driving for `t` seconds from its start.
// Interpolating between samples can overshoot the curvature limit by a hair;
// within kInterpSlack the speed is held to the limit of the interpolated
// curvature. Larger excesses come from the profile itself and are kept.
EgoState drive(const Trajectory& tr, double t, const FrictionParams& fp, const FrictionMap& fm, double s0) {
  const auto& p = tr.path;
  const auto& v = tr.profile.v;
  double left = t;
  const Eigen::Index n = p.size();
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double ds = p.s[k + 1] - p.s[k];
    const double vsum = v[k] + v[k + 1];
    const double dt = vsum > 1e-9 ? 2.0 * ds / vsum : std::numeric_limits<double>::infinity();
    if (left <= dt || k + 2 == n) {
      const double a = tr.profile.a[k];
      const double tau = std::min(left, dt);
      const double done = std::clamp(v[k] * tau + 0.5 * a * tau * tau, 0.0, ds);
      const double f = ds > 0.0 ? done / ds : 0.0;
      EgoState e;
      e.x = p.x[k] + f * (p.x[k + 1] - p.x[k]);
      e.y = p.y[k] + f * (p.y[k + 1] - p.y[k]);
      e.psi = p.psi[k] + f * (p.psi[k + 1] - p.psi[k]);
      e.kappa = p.kappa[k] + f * (p.kappa[k + 1] - p.kappa[k]);
      e.arc = p.s[k] + done;
      e.v = std::sqrt(std::max(0.0, v[k] * v[k] + f * (v[k + 1] * v[k + 1] - v[k] * v[k])));
      const double lim = curvature_speed_limit(e.kappa, fp, fm.at(s0 + p.s[k] + done));
      if (e.v > lim && e.v <= lim * (1.0 + kInterpSlack)) e.v = lim;
      return e;
    }
    left -= dt;
  }
  throw InputError("trajectory too short to drive");
}

double lerp_profile(const ReferenceLine& line, const std::vector<double>& v, double s) {
  const double w = line.wrap(s);
  const auto i = line.segment_index(w);
  const auto j = (i + 1) % v.size();
  const double s0 = line.points()[i].s;
  const double s1 = line.segment_end(i);
  const double f = s1 > s0 ? (w - s0) / (s1 - s0) : 0.0;
  return v[i] + f * (v[j] - v[i]);
}

double zone_bound(const ReferenceLine& line, const ZoneSpec& z) {
  // widest bound on the zone's side over its extent
  double len = z.s_end - z.s_start;
  if (len < 0.0) len += line.lap_length();
  double w = 0.0;
  for (double d = 0.0; d <= len; d += 1.0) {
    const auto p = line.interpolate(z.s_start + d);
    w = std::max(w, z.side == Side::kLeft ? p.w_left : p.w_right);
  }
  return w;
}

bool in_zone(const ReferenceLine& line, const ZoneSpec& z, double s) {
  double len = z.s_end - z.s_start;
  if (len < 0.0) len += line.lap_length();
  double d = std::fmod(s - z.s_start, line.lap_length());
  if (d < 0.0) d += line.lap_length();
  return d <= len;
}

double clearance(const Vec2& p, double radius, const std::vector<CircleObstacle>& circles) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : circles) best = std::min(best, (p - Vec2(c.x, c.y)).norm() - c.radius - radius);
  return best;
}

}  // namespace

void add_lead_obstacles(ObstacleSet& obs, const ReferenceLine& line, const LeadState& lead, const PlannerConfig& cfg) {
  obs.add(ObstacleKind::kVehicle, vehicle_circles(line.to_cartesian(lead.s, lead.l), line.heading(lead.s),
                                                  cfg.veh_length, cfg.veh_width));
  std::vector<CircleObstacle> chain;
  for (double t : {0.5 * cfg.prediction_time, cfg.prediction_time}) {
    const double s = lead.s + lead.v * t;
    auto c = vehicle_circles(line.to_cartesian(s, lead.l), line.heading(s), cfg.veh_length, cfg.veh_width,
                             ObstacleKind::kPrediction);
    chain.insert(chain.end(), c.begin(), c.end());
  }
  obs.add(ObstacleKind::kPrediction, std::move(chain));
}

Lattice scenario_lattice(const Scenario& sc) {
  const auto text = csv::read_file(sc.raceline);
  const auto hash = fnv1a64(text);
  if (!sc.graph.empty()) return load_graph(sc.graph, hash);
  auto line = parse_reference_line(text, sc.raceline.string());
  if (!sc.track.empty()) line = rebase_bounds(line, load_reference_line(sc.track));
  const auto params = sc.params.empty() ? GraphParams{} : load_graph_params(sc.params);
  return build_lattice(line, params, hash);
}

TimingStats timing_stats(std::vector<double> ms) {
  TimingStats st;
  if (ms.empty()) return st;
  std::sort(ms.begin(), ms.end());
  double sum = 0.0;
  for (double m : ms) sum += m;
  st.mean = sum / static_cast<double>(ms.size());
  auto rank = [&](double q) {
    const auto i = static_cast<std::size_t>(std::ceil(q * static_cast<double>(ms.size())));
    return ms[std::clamp<std::size_t>(i, 1, ms.size()) - 1];
  };
  st.p50 = rank(0.5);
  st.p99 = rank(0.99);
  st.max = ms.back();
  return st;
}

SimResult simulate(const Scenario& sc, const Lattice& g) {
  const ReferenceLine& ref = g.ref;
  PlannerConfig cfg = sc.planner;
  if (!sc.friction.empty()) cfg.friction_map = FrictionMap::load(sc.friction, ref.lap_length());

  std::vector<double> lead_profile;
  if (sc.lead) {
    FrictionParams lp = cfg.friction;
    lp.v_cap = sc.lead->v_cap;
    lead_profile = lap_speed_profile(ref, lp);
  }

  std::vector<CircleObstacle> statics;
  for (const auto& o : sc.obstacles) {
    const Vec2 p = o.frenet ? ref.to_cartesian(o.frenet->s, o.frenet->l) : Vec2(o.x, o.y);
    statics.push_back({p.x(), p.y(), o.r, ObstacleKind::kStatic});
  }
  std::vector<std::vector<CircleObstacle>> zone_shapes;
  for (const auto& z : sc.zones) {
    const double w = zone_bound(ref, z) + 1.0;
    const double lo = z.side == Side::kLeft ? z.l_inner : -w;
    const double hi = z.side == Side::kLeft ? w : z.l_inner;
    zone_shapes.push_back(zone_circles(ref, z.s_start, z.s_end, lo, hi, kZonePitch));
  }

  SimResult res;
  res.zone_active_at.assign(sc.zones.size(), -1.0);
  res.min_clearance = std::numeric_limits<double>::infinity();

  EgoState ego;
  ego.s = ref.wrap(sc.ego_s);
  ego.l = sc.ego_l;
  ego.v = std::min(sc.ego_v, sc.ego_v_cap);
  ego.psi = ref.heading(ego.s);
  ego.kappa = ref.curvature(ego.s);
  {
    const Vec2 p = ref.to_cartesian(ego.s, ego.l);
    ego.x = p.x();
    ego.y = p.y();
  }
  std::optional<LeadState> lead;
  if (sc.lead) lead = LeadState{ref.wrap(sc.lead->s), sc.lead->l, std::min(sc.lead->v, sc.lead->v_cap)};

  std::string last_side;
  std::vector<int> previous_nodes;
  std::vector<CubicSegment> previous_path;
  const auto ticks = static_cast<int>(std::floor(sc.duration / sc.period + 1e-9));
  const double tol = 1e-6;

  for (int tick = 0; tick < ticks; ++tick) {
    const double t = tick * sc.period;

    // zone triggers
    for (std::size_t zi = 0; zi < sc.zones.size(); ++zi) {
      if (res.zone_active_at[zi] >= 0.0) continue;
      const auto& z = sc.zones[zi];
      bool fire = false;
      if (z.trigger == TriggerKind::kTime) {
        fire = t >= z.trigger_value;
      } else if (lead) {
        const double gap = station_delta(ref, lead->s, ego.s) - cfg.veh_length;
        fire = gap >= 0.0 && gap <= z.trigger_value;
      }
      if (fire) res.zone_active_at[zi] = t;
    }

    PlanRequest req;
    req.ego_s = ego.s;
    req.ego_l = ego.l;
    req.ego_v = ego.v;
    req.ego_heading = ego.psi;
    req.ego_kappa = ego.kappa;
    req.horizon = sc.horizon;
    req.previous_nodes = previous_nodes;
    req.previous_path = previous_path;
    for (const auto& c : statics) req.obstacles.add(ObstacleKind::kStatic, {c});
    bool overtake_allowed = sc.overtake_policy == OvertakePolicy::kAlways;
    for (std::size_t zi = 0; zi < sc.zones.size(); ++zi) {
      if (res.zone_active_at[zi] < 0.0) continue;
      req.obstacles.add(ObstacleKind::kZone, zone_shapes[zi]);
      if (lead && in_zone(ref, sc.zones[zi], lead->s)) overtake_allowed = true;
    }
    if (lead) {
      req.lead = lead;
      add_lead_obstacles(req.obstacles, ref, *lead, cfg);
    }

    ActionSet actions;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      actions = plan_cycle(g, req, cfg);
    } catch (const NoFeasibleStartError&) {
    }
    const double cycle_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    // behavior: overtake whenever available (and allowed), else keep straight
    const Trajectory* chosen = nullptr;
    if (overtake_allowed) {
      const auto* l = actions.find(kLeft);
      const auto* r = actions.find(kRight);
      if (l && r) {
        chosen = last_side == kRight ? r : last_side == kLeft ? l : (r->cost < l->cost ? r : l);
      } else {
        chosen = l ? l : r;
      }
    }
    if (!chosen) chosen = actions.find(kStraight);
    if (!chosen && !actions.empty()) chosen = &actions.primitives.begin()->second.front();

    TraceRecord rec;
    rec.t = t;
    rec.ego_s = ego.s;
    rec.ego_l = ego.l;
    rec.ego_v = ego.v;
    rec.primitive = chosen ? chosen->primitive : "none";
    rec.n_candidates = static_cast<int>(actions.size());
    rec.cycle_ms = cycle_ms;
    if (lead) {
      rec.lead_s = lead->s;
      rec.lead_l = lead->l;
    }
    res.trace.push_back(rec);

    if (chosen && chosen->primitive != kStraight) {
      last_side = chosen->primitive;
      if (res.first_overtake_t < 0.0) res.first_overtake_t = t;
      if (lead && std::abs(ref.curvature(lead->s)) > g.params.kappa_curve_thresh) ++res.overtake_in_curve;
    } else if (chosen) {
      last_side.clear();
    }
    {
      const double lim = lateral_limit(cfg.friction, cfg.friction_map.at(ego.s));
      const bool over_cap = ego.v > cfg.friction.v_cap * (1.0 + tol);
      const bool over_lat = std::abs(ego.kappa) * ego.v * ego.v > lim * (1.0 + tol);
      if (over_cap || over_lat) ++res.speed_violations;
    }
    if (chosen) {
      if (chosen->profile.infeasible_entry) ++res.infeasible_entries;
      res.snapshots.push_back(*chosen);
      previous_nodes = chosen->nodes;
    } else {
      ++res.degraded_ticks;
      previous_nodes.clear();
      previous_path.clear();
    }

    // advance ego and lead in 10 ms steps, sweeping for collisions
    const double ahead_before = lead ? station_delta(ref, lead->s, ego.s) : 0.0;
    const int steps = std::max(1, static_cast<int>(std::lround(sc.period / kSweepDt)));
    const double dt = sc.period / steps;
    double lead_target_l = lead ? lead->l : 0.0;
    if (lead) {
      for (std::size_t zi = 0; zi < sc.zones.size(); ++zi) {
        if (res.zone_active_at[zi] >= 0.0 && sc.zones[zi].lead_l) lead_target_l = *sc.zones[zi].lead_l;
      }
    }
    EgoState next = ego;
    for (int k = 1; k <= steps; ++k) {
      const double tk = k * dt;
      if (chosen) {
        next = drive(*chosen, tk, cfg.friction, cfg.friction_map, ego.s);
      } else {
        const double v1 = std::max(0.0, ego.v - cfg.friction.a_lon_max_dec * tk);
        const double s1 = ego.s + 0.5 * (ego.v + v1) * (ego.v > 0.0 ? std::min(tk, ego.v / cfg.friction.a_lon_max_dec) : 0.0);
        const Vec2 p = ref.to_cartesian(s1, ego.l);
        next = ego;
        next.v = v1;
        next.x = p.x();
        next.y = p.y();
        next.psi = ref.heading(s1);
        next.kappa = ref.curvature(s1);
      }
      if (lead) {
        const double vp = lerp_profile(ref, lead_profile, lead->s);
        lead->v = std::min(vp, lead->v + cfg.friction.a_lon_max_acc * dt);
        lead->s = ref.wrap(lead->s + lead->v * dt);
        const double dl = lead_target_l - lead->l;
        lead->l += std::clamp(dl, -1.0 * dt, 1.0 * dt);
      }

      const Vec2 pe(next.x, next.y);
      res.ego_path.push_back({t + tk, next.x, next.y});
      double c = clearance(pe, cfg.veh_radius, statics);
      if (lead) {
        const Vec2 pl = ref.to_cartesian(lead->s, lead->l);
        res.lead_path.push_back({t + tk, pl.x(), pl.y()});
        c = std::min(c, clearance(pe, cfg.veh_radius,
                                  vehicle_circles(pl, ref.heading(lead->s), cfg.veh_length, cfg.veh_width)));
      }
      res.min_clearance = std::min(res.min_clearance, c);
      if (c < 0.0) res.collision = true;

      if (chosen) {
        const double lim = lateral_limit(cfg.friction, cfg.friction_map.at(ref.wrap(ego.s)));
        res.max_lat_ratio = std::max(res.max_lat_ratio, std::abs(next.kappa) * next.v * next.v / lim);
      }
    }
    if (chosen) previous_path = chain_from<double>(chosen->segments, next.arc);
    const auto f = ref.to_frenet(Vec2(next.x, next.y));
    ego = next;
    ego.s = f.s;
    ego.l = f.l;
    res.max_abs_l = std::max(res.max_abs_l, std::abs(ego.l));
    if (lead) {
      const double ahead_after = station_delta(ref, lead->s, ego.s);
      if (ahead_before > 0.0 && ahead_after <= 0.0) {
        res.passes.push_back({t + sc.period, lead->s, ref.curvature(lead->s)});
      }
    }
  }
  res.final_l = ego.l;
  return res;
}

}  // namespace raceplan::sim
