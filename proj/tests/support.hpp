#pragma once
// Test fixtures and independent oracles. Nothing here calls the code paths it
// is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "raceplan/lattice.hpp"
#include "raceplan/online_planner.hpp"
#include "raceplan/ref_line.hpp"
#include "raceplan/sim/track_gen.hpp"
#include "raceplan/spline.hpp"
#include "raceplan/velocity.hpp"

namespace rp_test {

using namespace raceplan;

// Counter-clockwise circle through the origin with heading 0 there, center (0, r).
inline ReferenceLine circle_line(double r, int n, double w = 5.0, bool with_columns = true) {
  std::vector<RefLinePoint> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / n;
    auto& p = pts[static_cast<std::size_t>(i)];
    p.x = r * std::sin(phi);
    p.y = r - r * std::cos(phi);
    p.s = r * phi;
    p.theta = normalize_angle(phi);
    p.kappa = 1.0 / r;
    p.v_ref = 10.0;
    p.w_left = p.w_right = w;
  }
  return ReferenceLine::from_points(std::move(pts), {with_columns, with_columns, with_columns});
}

// Thin closed rectangle walked counter-clockwise with zero curvature given on
// every point: a loop the layer placement treats as straight everywhere.
inline ReferenceLine flat_loop(double lap, double w = 5.0, double spacing = 1.0) {
  const double short_side = 1.0;
  const double long_side = 0.5 * lap - short_side;
  std::vector<RefLinePoint> pts;
  auto edge = [&](Vec2 a, Vec2 b) {
    const int k = static_cast<int>(std::ceil((b - a).norm() / spacing));
    for (int i = 0; i < k; ++i) {
      const Vec2 p = a + (b - a) * (static_cast<double>(i) / k);
      RefLinePoint q;
      q.x = p.x();
      q.y = p.y();
      q.theta = std::atan2(b.y() - a.y(), b.x() - a.x());
      q.v_ref = 10.0;
      q.w_left = q.w_right = w;
      pts.push_back(q);
    }
  };
  edge({0, 0}, {long_side, 0});
  edge({long_side, 0}, {long_side, short_side});
  edge({long_side, short_side}, {0, short_side});
  edge({0, short_side}, {0, 0});
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) s += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    pts[i].s = s;
  }
  return ReferenceLine::from_points(std::move(pts), {true, true, true});
}

inline const ReferenceLine& airfield() {
  static const ReferenceLine line = sim::make_airfield();
  return line;
}

inline const Lattice& airfield_lattice() {
  static const Lattice g = build_lattice(airfield(), GraphParams{});
  return g;
}

// ---------------------------------------------------------------------------
// Random layered graphs and exhaustive path enumeration

struct RandomGraph {
  Lattice g;
  std::vector<int> window;
  BlockedSets blocked;
  int start = -1;
};

inline RandomGraph random_graph(std::mt19937_64& rng, int max_layers = 7, int max_nodes = 7) {
  std::uniform_int_distribution<int> n_layers(2, max_layers);
  std::uniform_int_distribution<int> n_nodes(1, max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandomGraph r;
  Lattice& g = r.g;
  g.cyclic = false;
  g.params.w_rl = 5.0;
  const int layers = n_layers(rng);
  for (int layer = 0; layer < layers; ++layer) {
    g.layer_s.push_back(10.0 * layer);
    const int k = n_nodes(rng);
    const int lo = -(k / 2);
    for (int j = 0; j < k; ++j) {
      LatticeNode n;
      n.layer = layer;
      n.lat_idx = lo + j;
      n.s = 10.0 * layer;
      n.l = 0.5 * n.lat_idx;
      g.nodes.push_back(n);
    }
  }
  g.lap_length = 10.0 * layers;
  g.reindex();
  // edges: random subset, costs from a small set of values so equal-cost
  // alternatives are common, plus some continuous ones
  for (std::size_t a = 0; a < g.nodes.size(); ++a) {
    for (std::size_t b = 0; b < g.nodes.size(); ++b) {
      if (g.nodes[b].layer != g.nodes[a].layer + 1 || unit(rng) < 0.25) continue;
      LatticeEdge e;
      e.from = static_cast<int>(a);
      e.to = static_cast<int>(b);
      e.cost = unit(rng) < 0.5 ? std::floor(unit(rng) * 4.0) * 0.75 : unit(rng) * 10.0;
      g.edges.push_back(e);
    }
  }
  g.reindex();
  r.blocked = BlockedSets(g);
  for (auto& b : r.blocked.nodes) b = unit(rng) < 0.15;
  for (auto& b : r.blocked.edges) b = unit(rng) < 0.15;
  for (int layer = 0; layer < layers; ++layer) r.window.push_back(layer);
  std::uniform_int_distribution<int> pick(g.layer_begin[0], g.layer_begin[1] - 1);
  r.start = pick(rng);
  r.blocked.nodes[r.start] = 0;
  return r;
}

// Minimum over every start-to-goal-layer path of the summed edge costs plus
// w_rl |l| of the final node, or nullopt when no path exists. Costs are summed
// in path order from zero, then the goal term is added.
inline std::optional<double> brute_force_cost(const Lattice& g, const std::vector<int>& window,
                                              const BlockedSets& blocked, int start) {
  if (blocked.node(start)) return std::nullopt;
  std::optional<double> best;
  std::function<void(int, std::size_t, double)> walk = [&](int v, std::size_t depth, double acc) {
    if (depth + 1 == window.size()) {
      const double c = acc + g.params.w_rl * std::abs(g.nodes[v].l);
      if (!best || c < *best) best = c;
      return;
    }
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      const auto& e = g.edges[k];
      if (e.from != v || blocked.edge(static_cast<int>(k)) || blocked.node(e.to)) continue;
      if (g.nodes[e.to].layer != window[depth + 1]) continue;
      walk(e.to, depth + 1, acc + e.cost);
    }
  };
  walk(start, 0, 0.0);
  return best;
}

// Sum of the returned path's edge costs in path order plus the goal term; -1
// if the sequence uses a missing or blocked element.
inline double path_cost(const Lattice& g, const BlockedSets& blocked, const std::vector<int>& nodes) {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (blocked.node(nodes[i])) return -1.0;
    if (i == 0) continue;
    int found = -1;
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      if (g.edges[k].from == nodes[i - 1] && g.edges[k].to == nodes[i]) found = static_cast<int>(k);
    }
    if (found < 0 || blocked.edge(found)) return -1.0;
    acc += g.edges[static_cast<std::size_t>(found)].cost;
  }
  return acc + g.params.w_rl * std::abs(g.nodes[nodes.back()].l);
}

// ---------------------------------------------------------------------------
// Velocity oracle: dynamic programming over a uniform speed grid. A grid speed
// at sample k is kept if it is reachable from v_start and can still reach a
// terminal speed <= v_goal, under the same per-step ellipse rules the profile
// obeys. Returns the largest kept speed per sample, or nullopt when v_start
// cannot be continued at all.

inline std::optional<std::vector<double>> dp_velocity(const SampledPath& path, double v_start, double v_goal,
                                                      const FrictionParams& p, double dv = 1e-3) {
  const auto n = static_cast<std::size_t>(path.size());
  const double top = p.v_cap;
  const auto m = static_cast<std::size_t>(std::floor(top / dv)) + 1;
  auto grid = [&](std::size_t i) { return static_cast<double>(i) * dv; };
  auto vlim = [&](std::size_t k) {
    const double kap = std::abs(path.kappa[static_cast<Eigen::Index>(k)]);
    return kap > 0.0 ? std::min(top, std::sqrt(p.a_lat_max / kap)) : top;
  };
  auto use = [&](std::size_t k, double v) {
    const double r = path.kappa[static_cast<Eigen::Index>(k)] * v * v / p.a_lat_max;
    return std::sqrt(std::max(0.0, 1.0 - r * r));
  };
  auto ds = [&](std::size_t k) {
    return path.s[static_cast<Eigen::Index>(k + 1)] - path.s[static_cast<Eigen::Index>(k)];
  };
  // speed interval reachable at k+1 from speed v at k
  auto step = [&](std::size_t k, double v) {
    const double f = use(k, v);
    const double hi = std::sqrt(v * v + 2.0 * ds(k) * p.a_lon_max_acc * f);
    const double lo = std::sqrt(std::max(0.0, v * v - 2.0 * ds(k) * p.a_lon_max_dec * f));
    return std::pair{lo, std::min(hi, vlim(k + 1))};
  };
  auto idx_ceil = [&](double v) { return static_cast<std::size_t>(std::max(0.0, std::ceil(v / dv - 1e-12))); };
  auto idx_floor = [&](double v) {
    return static_cast<std::size_t>(std::min<double>(static_cast<double>(m - 1), std::floor(v / dv + 1e-12)));
  };

  // backward: co-reachable grid sets, stored as prefix counts
  std::vector<std::vector<int>> pre(n, std::vector<int>(m + 1, 0));
  auto mark_prefix = [&](std::vector<int>& pc, const std::vector<char>& ok) {
    for (std::size_t i = 0; i < m; ++i) pc[i + 1] = pc[i] + ok[i];
  };
  std::vector<char> ok(m, 0);
  for (std::size_t i = 0; i < m; ++i) ok[i] = grid(i) <= std::min(v_goal, vlim(n - 1));
  mark_prefix(pre[n - 1], ok);
  std::vector<std::vector<char>> co(n);
  co[n - 1] = ok;
  for (std::size_t k = n - 1; k-- > 0;) {
    std::vector<char> cur(m, 0);
    for (std::size_t i = 0; i < m && grid(i) <= vlim(k); ++i) {
      const auto [lo, hi] = step(k, grid(i));
      if (hi < lo) continue;
      const std::size_t a = idx_ceil(lo), b = idx_floor(hi);
      if (a <= b && pre[k + 1][b + 1] - pre[k + 1][a] > 0) cur[i] = 1;
    }
    mark_prefix(pre[k], cur);
    co[k] = std::move(cur);
  }

  // forward from the exact start speed
  std::vector<double> out(n, 0.0);
  out[0] = v_start;
  std::vector<char> reach(m, 0);
  {
    const auto [lo, hi] = step(0, v_start);
    if (hi < lo) return std::nullopt;
    for (std::size_t i = idx_ceil(lo); i <= idx_floor(hi) && i < m; ++i) reach[i] = 1;
  }
  for (std::size_t k = 1; k < n; ++k) {
    double best = -1.0;
    for (std::size_t i = m; i-- > 0;) {
      if (reach[i] && co[k][i]) {
        best = grid(i);
        break;
      }
    }
    if (best < 0.0) return std::nullopt;
    out[k] = best;
    if (k + 1 == n) break;
    std::vector<int> diff(m + 1, 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (!reach[i] || !co[k][i]) continue;
      const auto [lo, hi] = step(k, grid(i));
      if (hi < lo) continue;
      const std::size_t a = idx_ceil(lo), b = idx_floor(hi);
      if (a > b || a >= m) continue;
      ++diff[a];
      --diff[b + 1];
    }
    int run = 0;
    for (std::size_t i = 0; i < m; ++i) {
      run += diff[i];
      reach[i] = run > 0;
    }
  }
  return out;
}

// Path with the given per-sample curvature and spacing; positions are only
// consistent enough for the velocity code, which reads s and kappa.
inline SampledPath kappa_path(const std::vector<double>& kappa, double ds) {
  SampledPath p;
  p.resize(static_cast<Eigen::Index>(kappa.size()));
  double psi = 0.0, x = 0.0, y = 0.0;
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    p.s[k] = ds * static_cast<double>(i);
    p.x[k] = x;
    p.y[k] = y;
    p.psi[k] = psi;
    p.kappa[k] = kappa[i];
    x += ds * std::cos(psi);
    y += ds * std::sin(psi);
    psi += ds * kappa[i];
  }
  return p;
}

// ---------------------------------------------------------------------------
// Geometry oracles

// Arc length of a cubic by trapezoid rule on `n` intervals.
inline double trapezoid_length(const CubicSegment& seg, int n = 10000) {
  double total = 0.0;
  double prev = seg.d1(0.0).norm();
  for (int i = 1; i <= n; ++i) {
    const double cur = seg.d1(static_cast<double>(i) / n).norm();
    total += 0.5 * (prev + cur) / n;
    prev = cur;
  }
  return total;
}

// Unit-free profile checks used by unit and acceptance tests alike.
struct ProfileCheck {
  double max_lat = 0.0;      // max kappa v^2 / a_lat_lim - 1
  double max_ellipse = 0.0;  // max (a/a_lon)^2 + (kappa v^2/a_lat)^2 - 1
};

inline ProfileCheck check_profile(const SampledPath& path, const VelocityProfile& prof, const FrictionParams& p,
                                  const Eigen::ArrayXd& scale = {}) {
  ProfileCheck c{-1.0, -1.0};
  for (Eigen::Index k = 0; k < path.size(); ++k) {
    const double a_lat = p.a_lat_max * (scale.size() ? scale[k] : 1.0);
    const double lat = std::abs(path.kappa[k]) * prof.v[k] * prof.v[k] / a_lat;
    c.max_lat = std::max(c.max_lat, lat - 1.0);
    if (k + 1 < path.size()) {
      const double ds = path.s[k + 1] - path.s[k];
      const double a = (prof.v[k + 1] * prof.v[k + 1] - prof.v[k] * prof.v[k]) / (2.0 * ds);
      const double a_lon = a >= 0.0 ? p.a_lon_max_acc : p.a_lon_max_dec;
      c.max_ellipse = std::max(c.max_ellipse, (a / a_lon) * (a / a_lon) + lat * lat - 1.0);
    }
  }
  return c;
}

}  // namespace rp_test
