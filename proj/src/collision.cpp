#include "raceplan/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "raceplan/errors.hpp"

namespace raceplan {

void ObstacleSet::add(ObstacleKind kind, std::vector<CircleObstacle> circles) {
  if (circles.empty()) return;
  ObstacleGroup g;
  g.kind = kind;
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (auto& c : circles) {
    if (!(c.radius > 0.0)) throw InputError("obstacle radius must be positive");
    c.kind = kind;
    lo = lo.cwiseMin(Vec2(c.x - c.radius, c.y - c.radius));
    hi = hi.cwiseMax(Vec2(c.x + c.radius, c.y + c.radius));
  }
  g.bound_center = 0.5 * (lo + hi);
  for (const auto& c : circles) {
    g.bound_radius = std::max(g.bound_radius, (Vec2(c.x, c.y) - g.bound_center).norm() + c.radius);
  }
  g.circles = std::move(circles);
  groups_.push_back(std::move(g));
}

std::size_t ObstacleSet::circle_count() const {
  return std::accumulate(groups_.begin(), groups_.end(), std::size_t{0},
                         [](std::size_t n, const ObstacleGroup& g) { return n + g.circles.size(); });
}

std::vector<CircleObstacle> vehicle_circles(const Vec2& center, double heading, double length, double width,
                                            ObstacleKind kind) {
  const double third = length / 3.0;
  const double r = std::hypot(third / 2.0, width / 2.0);
  const Vec2 t = heading_vector(heading);
  std::vector<CircleObstacle> out;
  for (int k = -1; k <= 1; ++k) {
    const Vec2 c = center + t * (k * third);
    out.push_back({c.x(), c.y(), r, kind});
  }
  return out;
}

std::vector<CircleObstacle> zone_circles(const ReferenceLine& line, double s0, double s1, double l_lo, double l_hi,
                                         double spacing) {
  // a square grid of pitch d is covered by circles of radius d/sqrt(2)
  const double r = spacing / std::sqrt(2.0) + 1e-9;
  double len = s1 - s0;
  if (len < 0.0) len += line.lap_length();
  const int ns = std::max(1, static_cast<int>(std::ceil(len / spacing)));
  const int nl = std::max(1, static_cast<int>(std::ceil((l_hi - l_lo) / spacing)));
  std::vector<CircleObstacle> out;
  out.reserve(static_cast<std::size_t>((ns + 1) * (nl + 1)));
  for (int i = 0; i <= ns; ++i) {
    const double s = s0 + len * i / ns;
    for (int j = 0; j <= nl; ++j) {
      const Vec2 p = line.to_cartesian(s, l_lo + (l_hi - l_lo) * j / nl);
      out.push_back({p.x(), p.y(), r, ObstacleKind::kZone});
    }
  }
  return out;
}

bool circle_hit(const Vec2& p, const CircleObstacle& c, double veh_radius) {
  const double dx = p.x() - c.x;
  const double dy = p.y() - c.y;
  const double rr = c.radius + veh_radius;
  return dx * dx + dy * dy < rr * rr;
}

namespace {

bool far_apart(const Vec2& a, double ra, const Vec2& b, double rb) {
  const double r = ra + rb;
  return (a - b).squaredNorm() >= r * r;
}

bool samples_hit(const Eigen::ArrayXd& xs, const Eigen::ArrayXd& ys, const ObstacleGroup& g, double veh_radius) {
  for (const auto& c : g.circles) {
    const double rr = (c.radius + veh_radius) * (c.radius + veh_radius);
    if ((((xs - c.x).square() + (ys - c.y).square()) < rr).any()) return true;
  }
  return false;
}

}  // namespace

bool node_blocked(const LatticeNode& node, const ObstacleGroup& g, double veh_radius) {
  const Vec2 p = node.pose.position();
  if (far_apart(p, veh_radius, g.bound_center, g.bound_radius)) return false;
  return std::any_of(g.circles.begin(), g.circles.end(), [&](const CircleObstacle& c) { return circle_hit(p, c, veh_radius); });
}

bool node_blocked(const LatticeNode& node, const ObstacleSet& obs, double veh_radius) {
  return std::any_of(obs.groups().begin(), obs.groups().end(),
                     [&](const ObstacleGroup& g) { return node_blocked(node, g, veh_radius); });
}

bool edge_blocked(const LatticeEdge& edge, const ObstacleGroup& g, double veh_radius) {
  if (far_apart(edge.bound_center, edge.bound_radius + veh_radius, g.bound_center, g.bound_radius)) return false;
  return samples_hit(edge.sampled.x, edge.sampled.y, g, veh_radius);
}

bool edge_blocked(const LatticeEdge& edge, const ObstacleSet& obs, double veh_radius) {
  return std::any_of(obs.groups().begin(), obs.groups().end(),
                     [&](const ObstacleGroup& g) { return edge_blocked(edge, g, veh_radius); });
}

bool path_blocked(const SampledPath& path, const ObstacleSet& obs, double veh_radius) {
  return std::any_of(obs.groups().begin(), obs.groups().end(),
                     [&](const ObstacleGroup& g) { return samples_hit(path.x, path.y, g, veh_radius); });
}

void BlockedSets::merge(const BlockedSets& other) {
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] |= other.nodes[i];
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] |= other.edges[i];
}

std::size_t BlockedSets::node_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](std::uint8_t b) { return b != 0; }));
}

std::size_t BlockedSets::edge_count() const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [](std::uint8_t b) { return b != 0; }));
}

BlockedSets build_blocked_sets(const Lattice& g, std::span<const int> window_layers, const ObstacleSet& obs,
                               double veh_radius) {
  BlockedSets out(g);
  for (const auto& group : obs.groups()) {
    for (int layer : window_layers) {
      for (int v = g.layer_begin[layer]; v < g.layer_begin[layer + 1]; ++v) {
        if (group.path_like()) {
          if (!out.nodes[v] && node_blocked(g.nodes[v], group, veh_radius)) out.nodes[v] = 1;
        } else {
          for (int k = g.out_begin[v]; k < g.out_begin[v + 1]; ++k) {
            if (!out.edges[k] && edge_blocked(g.edges[k], group, veh_radius)) out.edges[k] = 1;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace raceplan
