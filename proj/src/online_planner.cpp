#include "raceplan/online_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "raceplan/errors.hpp"

namespace raceplan {

std::size_t ActionSet::size() const {
  std::size_t n = 0;
  for (const auto& [name, list] : primitives) n += list.size();
  return n;
}

const Trajectory* ActionSet::find(const std::string& name) const {
  const auto it = primitives.find(name);
  return it == primitives.end() || it->second.empty() ? nullptr : &it->second.front();
}

bool operator==(const Trajectory& a, const Trajectory& b) {
  return a.primitive == b.primitive && a.nodes == b.nodes && a.cost == b.cost && a.segments == b.segments &&
         a.path == b.path && (a.profile.v == b.profile.v).all() && (a.profile.a == b.profile.a).all() &&
         a.profile.infeasible_entry == b.profile.infeasible_entry && a.following == b.following;
}

bool ActionSet::operator==(const ActionSet& other) const { return primitives == other.primitives; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxRepairs = 12;
constexpr double kHoldTolerance = 0.1;  // relative cost excess tolerated for the previous route

// Index of the first path sample inside any circle, or -1.
Eigen::Index first_hit(const SampledPath& path, const ObstacleSet& obs, double veh_radius) {
  Eigen::Index first = -1;
  for (const auto& grp : obs.groups()) {
    for (const auto& c : grp.circles) {
      const double rr = (c.radius + veh_radius) * (c.radius + veh_radius);
      const Eigen::Index end = first < 0 ? path.size() : first;
      for (Eigen::Index k = 0; k < end; ++k) {
        const double dx = path.x[k] - c.x;
        const double dy = path.y[k] - c.y;
        if (dx * dx + dy * dy < rr) {
          first = k;
          break;
        }
      }
    }
  }
  return first;
}

// Station distance from `from` forward to `to`, in [0, lap).
double ahead(const Lattice& g, double to, double from) {
  double d = std::fmod(to - from, g.lap_length);
  if (d < 0.0) d += g.lap_length;
  return d;
}

// Layer holding station s, i.e. the last layer at or before it.
int layer_at(const Lattice& g, double s) {
  const double w = g.ref.wrap(s);
  const auto it = std::upper_bound(g.layer_s.begin(), g.layer_s.end(), w);
  if (it == g.layer_s.begin()) return g.num_layers() - 1;
  return static_cast<int>(it - g.layer_s.begin()) - 1;
}

bool lead_counts(const Lattice& g, const PlanRequest& req, const PlannerConfig& cfg) {
  if (!req.lead) return false;
  const double d = station_delta(g.ref, req.lead->s, req.ego_s);
  return d > -cfg.lead_rear_clearance && d <= req.horizon;
}

bool better_pred(const Lattice& g, int a, int b) {
  if (b < 0) return true;
  const int la = std::abs(g.nodes[a].lat_idx);
  const int lb = std::abs(g.nodes[b].lat_idx);
  return la != lb ? la < lb : a < b;
}

// Edges the ego cannot enter at its current speed even when braking from now
// on with half its deceleration (the other half of the ellipse is left for
// cornering). Only layers within braking distance can be affected.
BlockedSets unreachable_edges(const Lattice& g, const std::vector<int>& window, const PlanRequest& req,
                              const PlannerConfig& cfg) {
  BlockedSets out(g);
  const double v2 = req.ego_v * req.ego_v;
  const double brake = cfg.friction.a_lon_max_dec;  // v^2 drops by 2 * (brake / 2) * d
  for (int layer : window) {
    const double d0 = station_delta(g.ref, g.layer_s[layer], req.ego_s);
    if (d0 < 0.0) continue;
    if (v2 - brake * d0 <= 0.0) break;
    for (int v = g.layer_begin[layer]; v < g.layer_begin[layer + 1]; ++v) {
      for (int k = g.out_begin[v]; k < g.out_begin[v + 1]; ++k) {
        const auto& smp = g.edges[k].sampled;
        for (Eigen::Index i = 0; i < smp.size(); ++i) {
          const double reach = v2 - brake * (d0 + smp.s[i]);
          if (reach <= 0.0) break;
          const double lim = lateral_limit(cfg.friction, cfg.friction_map.at(g.layer_s[layer] + smp.s[i]));
          if (std::abs(smp.kappa[i]) * reach > lim) {
            out.edges[k] = 1;
            break;
          }
        }
      }
    }
  }
  return out;
}

ObstacleSet lead_footprint(const Lattice& g, const LeadState& lead, const PlannerConfig& cfg) {
  ObstacleSet out;
  for (double t : {0.0, 0.5 * cfg.prediction_time, cfg.prediction_time}) {
    const double s = lead.s + lead.v * t;
    out.add(ObstacleKind::kVehicle,
            vehicle_circles(g.ref.to_cartesian(s, lead.l), g.ref.heading(s), cfg.veh_length, cfg.veh_width));
  }
  return out;
}

}  // namespace

Pose ego_pose(const Lattice& g, const PlanRequest& req) {
  const Vec2 p = g.ref.to_cartesian(req.ego_s, req.ego_l);
  return {p.x(), p.y(), req.ego_heading ? *req.ego_heading : g.ref.heading(req.ego_s)};
}

NodeTemplate make_node_template(const Lattice& g, const PlanRequest& req, const PlannerConfig& cfg) {
  if (g.num_layers() < 2) throw InputError("lattice has fewer than two layers");
  if (!(req.horizon >= g.params.min_horizon)) throw InputError("planning horizon below min_horizon");
  if (!(req.ego_v >= 0.0)) throw InputError("negative ego velocity");
  const auto rp = g.ref.interpolate(req.ego_s);
  if (req.ego_l > rp.w_left || req.ego_l < -rp.w_right) throw InputError("ego outside track bounds");

  NodeTemplate tpl;
  const double s_pred = req.ego_s + req.ego_v * cfg.t_calc;
  int start = g.next_layer(layer_at(g, s_pred));
  if (ahead(g, g.layer_s[start], req.ego_s) <= 0.0) start = g.next_layer(start);

  double dist = ahead(g, g.layer_s[start], req.ego_s);
  int layer = start;
  tpl.window.push_back(layer);
  while (dist < req.horizon) {
    dist += g.layer_gap(layer);
    layer = g.next_layer(layer);
    if (layer == start || dist >= g.lap_length) throw InputError("planning horizon exceeds the lap");
    tpl.window.push_back(layer);
  }
  tpl.goal_layer = layer;

  const auto fixed = req.obstacles.filter([](const ObstacleGroup& grp) { return !grp.dynamic(); });
  tpl.blocked = build_blocked_sets(g, tpl.window, fixed, cfg.veh_radius + cfg.plan_margin);

  // spot obstacles remove edges only; a start node inside one is still unusable
  auto admissible = [&](int v) {
    return !tpl.blocked.node(v) && !node_blocked(g.nodes[v], fixed, cfg.veh_radius + cfg.plan_margin);
  };
  for (int v : req.previous_nodes) {
    if (v >= 0 && v < static_cast<int>(g.nodes.size()) && g.nodes[v].layer == start && admissible(v)) {
      tpl.start_node = v;
      return tpl;
    }
  }
  int best = -1;
  for (int v = g.layer_begin[start]; v < g.layer_begin[start + 1]; ++v) {
    if (!admissible(v)) continue;
    if (best < 0) {
      best = v;
      continue;
    }
    const double dv = std::abs(g.nodes[v].l - req.ego_l);
    const double db = std::abs(g.nodes[best].l - req.ego_l);
    if (dv < db || (dv == db && std::abs(g.nodes[v].lat_idx) < std::abs(g.nodes[best].lat_idx))) best = v;
  }
  if (best < 0) throw NoFeasibleStartError();
  tpl.start_node = best;
  return tpl;
}

std::map<std::string, BlockedSets> make_action_templates(const NodeTemplate& tpl, const std::optional<LeadState>& lead,
                                                         const Lattice& g, const PlanRequest& req,
                                                         const PlannerConfig& cfg) {
  std::map<std::string, BlockedSets> out;
  out.emplace(kStraight, tpl.blocked);
  if (!lead) return out;

  const auto dyn = req.obstacles.filter([](const ObstacleGroup& grp) { return grp.dynamic(); });
  BlockedSets base = tpl.blocked;
  base.merge(build_blocked_sets(g, tpl.window, dyn, cfg.veh_radius + cfg.plan_margin));

  // A layer is closed on the lead's side from one gap behind the lead up to
  // where the ego, at its current speed, would be clear ahead of it.
  const double gap = g.layer_gap(layer_at(g, lead->s));
  // lateral offset at which the ego clears the lead's circles with margin
  const double lead_r = vehicle_circles(Vec2::Zero(), 0.0, cfg.veh_length, cfg.veh_width).front().radius;
  const double side = cfg.veh_radius + cfg.plan_margin + lead_r;
  const double v_ego = std::max(req.ego_v, 1.0);
  BlockedSets left = base;
  BlockedSets right = base;
  for (int layer : tpl.window) {
    const double d_now = station_delta(g.ref, g.layer_s[layer], lead->s);
    const double t_arrive = std::max(0.0, station_delta(g.ref, g.layer_s[layer], req.ego_s)) / v_ego;
    const double t_pred = std::max(t_arrive, cfg.prediction_time);
    const double d_pred = d_now - lead->v * t_pred;
    if (d_now < -gap || d_pred > gap + cfg.veh_length) continue;
    for (int v = g.layer_begin[layer]; v < g.layer_begin[layer + 1]; ++v) {
      if (g.nodes[v].l < lead->l + side) left.nodes[v] = 1;
      if (g.nodes[v].l > lead->l - side) right.nodes[v] = 1;
    }
  }
  out.emplace(kLeft, std::move(left));
  out.emplace(kRight, std::move(right));
  return out;
}

std::optional<SearchResult> shortest_path(const Lattice& g, const std::vector<int>& window, const BlockedSets& blocked,
                                          int start_node) {
  if (window.empty() || start_node < 0 || blocked.node(start_node)) return std::nullopt;
  if (g.nodes[start_node].layer != window.front()) return std::nullopt;

  const std::size_t n = g.nodes.size();
  std::vector<double> dist(n, kInf);
  std::vector<int> pred(n, -1);
  dist[start_node] = 0.0;

  for (std::size_t li = 0; li + 1 < window.size(); ++li) {
    const int layer = window[li];
    const int next = window[li + 1];
    for (int v = g.layer_begin[layer]; v < g.layer_begin[layer + 1]; ++v) {
      if (dist[v] == kInf || blocked.node(v)) continue;
      for (int k = g.out_begin[v]; k < g.out_begin[v + 1]; ++k) {
        if (blocked.edge(k)) continue;
        const auto& e = g.edges[k];
        if (g.nodes[e.to].layer != next || blocked.node(e.to)) continue;
        const double c = dist[v] + e.cost;
        if (c < dist[e.to] || (c == dist[e.to] && better_pred(g, v, pred[e.to]))) {
          dist[e.to] = c;
          pred[e.to] = v;
        }
      }
    }
  }

  // virtual goal node behind the last layer
  const int goal_layer = window.back();
  int best = -1;
  double best_cost = kInf;
  for (int v = g.layer_begin[goal_layer]; v < g.layer_begin[goal_layer + 1]; ++v) {
    if (dist[v] == kInf || blocked.node(v)) continue;
    const double c = dist[v] + g.params.w_rl * std::abs(g.nodes[v].l);
    if (c < best_cost || (c == best_cost && better_pred(g, v, best))) {
      best = v;
      best_cost = c;
    }
  }
  if (best < 0) return std::nullopt;

  SearchResult r;
  r.cost = best_cost;
  for (int v = best; v >= 0; v = pred[v]) r.nodes.push_back(v);
  std::reverse(r.nodes.begin(), r.nodes.end());
  return r;
}

namespace {

// The previous node sequence from the start node on, completed to the goal
// layer by a search from its last node. Empty when it left the window's
// layer order or touches a blocked node or edge.
std::optional<SearchResult> held_path(const Lattice& g, const std::vector<int>& window, const BlockedSets& blocked,
                                      const std::vector<int>& previous, int start_node) {
  const auto first = std::find(previous.begin(), previous.end(), start_node);
  if (first == previous.end()) return std::nullopt;
  SearchResult r;
  std::size_t j = 0;
  for (auto it = first; it != previous.end() && j < window.size(); ++it, ++j) {
    const int v = *it;
    if (g.nodes[v].layer != window[j] || blocked.node(v)) break;
    if (!r.nodes.empty()) {
      int edge = -1;
      for (int k = g.out_begin[r.nodes.back()]; k < g.out_begin[r.nodes.back() + 1]; ++k) {
        if (g.edges[k].to == v) edge = k;
      }
      if (edge < 0 || blocked.edge(edge)) return std::nullopt;
      r.cost += g.edges[edge].cost;
    }
    r.nodes.push_back(v);
  }
  if (r.nodes.empty()) return std::nullopt;
  const std::vector<int> rest(window.begin() + static_cast<std::ptrdiff_t>(r.nodes.size()) - 1, window.end());
  const auto tail = shortest_path(g, rest, blocked, r.nodes.back());
  if (!tail) return std::nullopt;
  r.nodes.insert(r.nodes.end(), tail->nodes.begin() + 1, tail->nodes.end());
  r.cost += tail->cost;
  return r;
}

// Smooth curve the chain is fitted to: the way from the ego to the start
// node, then the offline edge splines of the node sequence. The first part is
// the trajectory being executed when it passes the start node, so the
// geometry just ahead of the ego does not change between cycles; otherwise a
// C1 piece from the ego pose.
struct Guide {
  std::vector<CubicSegment> pieces;
  std::vector<int> edge;    // lattice edge per piece, -1 before the start node
  std::vector<double> cum;  // arc length at each piece start, plus the total
};

constexpr double kStitchTol = 0.1;  // [m]
constexpr double kReuseTol = 0.5;   // [m]

// Executed chain up to its point closest to `target`, if that is within
// `tol`. Coarse scan, then golden-section refinement.
std::vector<CubicSegment> stitch_prefix(const std::vector<CubicSegment>& prev, const Vec2& target,
                                        double tol = kStitchTol) {
  constexpr int kScan = 32;
  std::size_t best_i = 0;
  double best_mu = 0.0;
  double best_d = kInf;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    for (int k = 0; k <= kScan; ++k) {
      const double mu = static_cast<double>(k) / kScan;
      const double d = (prev[i].point(mu) - target).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best_i = i;
        best_mu = mu;
      }
    }
  }
  if (prev.empty()) return {};
  const auto& seg = prev[best_i];
  double a = std::max(0.0, best_mu - 1.0 / kScan);
  double b = std::min(1.0, best_mu + 1.0 / kScan);
  constexpr double kGold = 0.6180339887498949;
  for (int it = 0; it < 40; ++it) {
    const double c = b - kGold * (b - a);
    const double d = a + kGold * (b - a);
    if ((seg.point(c) - target).squaredNorm() < (seg.point(d) - target).squaredNorm()) {
      b = d;
    } else {
      a = c;
    }
  }
  const double mu = 0.5 * (a + b);
  if ((seg.point(mu) - target).norm() > tol) return {};
  std::vector<CubicSegment> out(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(best_i));
  if (mu > 1e-9) out.push_back(sub_segment(seg, 0.0, mu));
  return out;
}

int edge_between(const Lattice& g, int from, int to) {
  int found = -1;
  for (int k = g.out_begin[from]; k < g.out_begin[from + 1]; ++k) {
    if (g.edges[k].to == to) found = k;
  }
  if (found < 0) throw InputError("assemble_path: nodes are not joined by an edge");
  return found;
}

// Index of the last node up to which `nodes` repeats the executed route and
// the executed chain passes within kReuseTol, or 0.
std::size_t reuse_length(const Lattice& g, const std::vector<int>& nodes, const std::vector<int>& previous_nodes,
                         const std::vector<CubicSegment>& previous, std::vector<CubicSegment>& prefix) {
  if (previous.empty()) return 0;
  const auto it = std::find(previous_nodes.begin(), previous_nodes.end(), nodes.front());
  std::size_t common = 0;
  while (common < nodes.size() && it + static_cast<std::ptrdiff_t>(common) < previous_nodes.end() &&
         it[static_cast<std::ptrdiff_t>(common)] == nodes[common]) {
    ++common;
  }
  // keep at least one lattice edge after the reused part
  for (std::size_t j = std::min(common, nodes.size() - 1); j-- > 1;) {
    prefix = stitch_prefix(previous, g.nodes[nodes[j]].pose.position(), kReuseTol);
    if (!prefix.empty()) return j;
  }
  return 0;
}

// With `reuse`, the executed chain is followed up to the last node the route
// shares with it, and a C1 piece joins it to the following node.
Guide make_guide(const Lattice& g, const std::vector<int>& nodes, const Pose& ego,
                 const std::vector<CubicSegment>& previous = {}, const std::vector<int>& previous_nodes = {},
                 bool reuse = false) {
  if (nodes.empty()) throw InputError("assemble_path: empty node sequence");
  Guide gd;
  std::vector<CubicSegment> prefix;
  const std::size_t from = reuse ? reuse_length(g, nodes, previous_nodes, previous, prefix) : 0;
  std::size_t next = 1;
  if (from > 0) {
    for (auto& p : prefix) {
      gd.pieces.push_back(std::move(p));
      gd.edge.push_back(-1);
    }
    const auto& last = gd.pieces.back();
    const Vec2 end = last.point(1.0);
    gd.pieces.push_back(fit_c1_segment<double>(Pose{end.x(), end.y(), last.heading(1.0)}, g.nodes[nodes[from + 1]].pose));
    gd.edge.push_back(edge_between(g, nodes[from], nodes[from + 1]));
    next = from + 2;
  } else {
    const Pose& first = g.nodes[nodes.front()].pose;
    if ((first.position() - ego.position()).norm() > 1e-3) {
      prefix = stitch_prefix(previous, first.position());
      if (prefix.empty()) prefix.push_back(fit_c1_segment<double>(ego, first));
      for (auto& p : prefix) {
        gd.pieces.push_back(std::move(p));
        gd.edge.push_back(-1);
      }
    }
  }
  for (std::size_t i = next; i < nodes.size(); ++i) {
    const int k = edge_between(g, nodes[i - 1], nodes[i]);
    gd.pieces.push_back(g.edges[k].segment);
    gd.edge.push_back(k);
  }
  gd.cum.push_back(0.0);
  for (const auto& p : gd.pieces) gd.cum.push_back(gd.cum.back() + p.s_len);
  return gd;
}

// Point at arc length u along one piece; the mu(u) map is tabulated coarsely.
Vec2 piece_point(const CubicSegment& seg, double u) {
  constexpr int kTable = 16;
  double prev_mu = 0.0;
  double prev_len = 0.0;
  for (int k = 1; k <= kTable; ++k) {
    const double mu = static_cast<double>(k) / kTable;
    const double len = prev_len + arc_length<double>(seg, prev_mu, mu, 1);
    if (u <= len || k == kTable) {
      const double f = len > prev_len ? std::clamp((u - prev_len) / (len - prev_len), 0.0, 1.0) : 0.0;
      return seg.point(prev_mu + f * (mu - prev_mu));
    }
    prev_mu = mu;
    prev_len = len;
  }
  return seg.point(1.0);
}

// Point at arc length u along the whole guide.
Vec2 guide_point(const Guide& gd, double u) {
  const auto it = std::upper_bound(gd.cum.begin(), gd.cum.end(), u);
  const auto i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - gd.cum.begin() - 1, 0,
                                                                      static_cast<std::ptrdiff_t>(gd.pieces.size()) - 1));
  return piece_point(gd.pieces[i], u - gd.cum[i]);
}

// Waypoints evenly spaced along the guide, spacing close to `h`. Even spacing
// keeps the mu-parametrized chain from oscillating.
std::vector<Vec2> guide_waypoints(const Guide& gd, const Vec2& ego, double h) {
  const double total = gd.cum.back();
  const int m = std::max(1, static_cast<int>(std::lround(total / h)));
  std::vector<Vec2> pts{ego};
  for (int j = 1; j < m; ++j) pts.push_back(guide_point(gd, total * j / m));
  pts.push_back(gd.pieces.back().point(1.0));
  return pts;
}

}  // namespace

std::vector<CubicSegment> assemble_segments(const Lattice& g, const std::vector<int>& nodes, const Pose& ego,
                                            std::optional<double> ego_kappa) {
  const Guide gd = make_guide(g, nodes, ego);
  if (gd.pieces.empty()) throw SplineError("assemble_path: path has no extent");
  const auto pts = guide_waypoints(gd, ego.position(), g.params.long_sep_curve);
  return solve_c2_chain<double>(pts, ego.theta, g.nodes[nodes.back()].pose.theta, ego_kappa);
}

SampledPath assemble_path(const Lattice& g, const std::vector<int>& nodes, const Pose& ego, double step,
                          std::optional<double> ego_kappa) {
  const auto segs = assemble_segments(g, nodes, ego, ego_kappa);
  return sample_chain<double>(segs, step);
}

ActionSet plan_cycle(const Lattice& g, const PlanRequest& req, const PlannerConfig& cfg) {
  const NodeTemplate tpl = make_node_template(g, req, cfg);
  const bool with_lead = lead_counts(g, req, cfg);
  const std::optional<LeadState> lead = with_lead ? req.lead : std::nullopt;
  const auto templates = make_action_templates(tpl, lead, g, req, cfg);
  const Pose ego = ego_pose(g, req);

  const auto fixed = req.obstacles.filter([](const ObstacleGroup& grp) { return !grp.dynamic(); });
  ObstacleSet lead_fp;
  if (lead) lead_fp = lead_footprint(g, *lead, cfg);

  const auto& goal = g.nodes[g.layer_begin[tpl.goal_layer]];
  const double v_goal = std::min(cfg.friction.v_cap, g.ref.interpolate(goal.s).v_ref);

  const BlockedSets reach = unreachable_edges(g, tpl.window, req, cfg);

  ActionSet out;
  for (const auto& [name, base] : templates) {
    const ObstacleSet& check = name == kStraight ? fixed : req.obstacles;
    // edges too sharp for the current speed are avoided when possible
    BlockedSets overlay = base;
    overlay.merge(reach);
    if (!shortest_path(g, tpl.window, overlay, tpl.start_node)) overlay = base;
    std::optional<Trajectory> accepted;
    bool reuse = true;
    // Path-like objects only remove nodes, so an edge between two free nodes
    // can still clip one. A hit in the independent re-check removes the
    // responsible edge and the search runs again.
    for (int attempt = 0; attempt < kMaxRepairs; ++attempt) {
      auto found = shortest_path(g, tpl.window, overlay, tpl.start_node);
      if (!found) break;
      // keep the previous route while it stays close to the optimum
      const auto held = held_path(g, tpl.window, overlay, req.previous_nodes, tpl.start_node);
      if (held && held->cost <= found->cost * (1.0 + kHoldTolerance)) found = held;
      Trajectory t;
      t.primitive = name;
      t.nodes = found->nodes;
      t.cost = found->cost;
      Guide gd;
      try {
        gd = make_guide(g, t.nodes, ego, req.previous_path, req.previous_nodes, reuse);
        if (gd.pieces.empty()) break;
        const auto pts = guide_waypoints(gd, ego.position(), cfg.waypoint_spacing);
        t.segments = solve_c2_chain<double>(pts, ego.theta, g.nodes[t.nodes.back()].pose.theta, req.ego_kappa);
        t.path = sample_chain<double>(t.segments, cfg.sample_step);
      } catch (const SplineError&) {
        break;
      }
      const Eigen::Index hit = first_hit(t.path, check, cfg.veh_radius);
      if (hit < 0) {
        accepted = std::move(t);
        break;
      }
      // chain and guide have nearly the same length; map the hit onto a guide piece
      const double u = t.path.s[hit] / std::max(t.path.length(), 1e-9) * gd.cum.back();
      const auto piece = static_cast<std::size_t>(
          std::clamp<std::ptrdiff_t>(std::upper_bound(gd.cum.begin(), gd.cum.end(), u) - gd.cum.begin() - 1, 0,
                                     static_cast<std::ptrdiff_t>(gd.pieces.size()) - 1));
      if (gd.edge[piece] < 0) {
        // the executed chain itself is hit; rebuild from the nodes
        if (!reuse) break;
        reuse = false;
        continue;
      }
      if (overlay.edges[gd.edge[piece]]) break;
      overlay.edges[gd.edge[piece]] = 1;
    }
    if (!accepted) continue;
    Trajectory& t = *accepted;

    Eigen::ArrayXd scale;
    if (!cfg.friction_map.empty()) {
      scale.resize(t.path.size());
      for (Eigen::Index k = 0; k < t.path.size(); ++k) scale[k] = cfg.friction_map.at(req.ego_s + t.path.s[k]);
    }
    // headroom for the curvature revisions of the next cycles
    FrictionParams fp = cfg.friction;
    fp.a_lat_max *= 1.0 - cfg.lateral_margin;
    t.following = lead && path_blocked(t.path, lead_fp, cfg.veh_radius + cfg.plan_margin);
    if (t.following) {
      const double gap = std::max(0.0, station_delta(g.ref, lead->s, req.ego_s) - cfg.veh_length);
      t.profile = follow_profile(t.path, gap, lead->v - req.ego_v, lead->v, req.ego_v, v_goal, fp,
                                 cfg.follow, scale);
    } else {
      t.profile = forward_backward_profile(t.path, req.ego_v, v_goal, fp, scale);
    }
    out.primitives[name].push_back(std::move(t));
  }
  return out;
}

}  // namespace raceplan
