#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "raceplan/lattice.hpp"

namespace raceplan {

enum class ObstacleKind : std::uint8_t { kStatic, kVehicle, kZone, kPrediction };

struct CircleObstacle {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  ObstacleKind kind = ObstacleKind::kStatic;
};

/// Circles describing one object. Predictions and zones are path-like (removed
/// via nodes); single static obstacles and vehicles are spot-like (removed via edges).
struct ObstacleGroup {
  ObstacleKind kind = ObstacleKind::kStatic;
  std::vector<CircleObstacle> circles;
  Vec2 bound_center = Vec2::Zero();
  double bound_radius = 0.0;

  bool path_like() const { return kind == ObstacleKind::kZone || kind == ObstacleKind::kPrediction; }
  bool dynamic() const { return kind == ObstacleKind::kVehicle || kind == ObstacleKind::kPrediction; }
};

class ObstacleSet {
 public:
  /// Adds a group; every circle takes the group's kind. Throws InputError on radius <= 0.
  void add(ObstacleKind kind, std::vector<CircleObstacle> circles);
  void add_circle(double x, double y, double radius, ObstacleKind kind = ObstacleKind::kStatic) {
    add(kind, {{x, y, radius, kind}});
  }

  const std::vector<ObstacleGroup>& groups() const { return groups_; }
  bool empty() const { return groups_.empty(); }
  std::size_t circle_count() const;

  /// Subset of groups satisfying `keep`.
  template <typename Pred>
  ObstacleSet filter(Pred keep) const {
    ObstacleSet out;
    for (const auto& g : groups_) {
      if (keep(g)) out.groups_.push_back(g);
    }
    return out;
  }

 private:
  std::vector<ObstacleGroup> groups_;
};

/// Three-circle cover of a vehicle rectangle along its heading.
std::vector<CircleObstacle> vehicle_circles(const Vec2& center, double heading, double length, double width,
                                            ObstacleKind kind = ObstacleKind::kVehicle);

/// Grid of circles covering the Frenet patch [s0, s1] x [l_lo, l_hi].
std::vector<CircleObstacle> zone_circles(const ReferenceLine& line, double s0, double s1, double l_lo, double l_hi,
                                         double spacing = 2.5);

bool circle_hit(const Vec2& p, const CircleObstacle& c, double veh_radius);

bool node_blocked(const LatticeNode& node, const ObstacleSet& obs, double veh_radius);
bool node_blocked(const LatticeNode& node, const ObstacleGroup& group, double veh_radius);

/// Sample-wise test with a bounding-circle early-out per edge and group.
bool edge_blocked(const LatticeEdge& edge, const ObstacleSet& obs, double veh_radius);
bool edge_blocked(const LatticeEdge& edge, const ObstacleGroup& group, double veh_radius);

/// Sample-wise test of any path against a set.
bool path_blocked(const SampledPath& path, const ObstacleSet& obs, double veh_radius);

/// Overlay of removed nodes and edges, indexed like the lattice. The offline
/// graph itself is never touched.
struct BlockedSets {
  std::vector<std::uint8_t> nodes;
  std::vector<std::uint8_t> edges;

  BlockedSets() = default;
  explicit BlockedSets(const Lattice& g) : nodes(g.nodes.size(), 0), edges(g.edges.size(), 0) {}

  bool node(int i) const { return nodes[i] != 0; }
  bool edge(int i) const { return edges[i] != 0; }
  void merge(const BlockedSets& other);
  std::size_t node_count() const;
  std::size_t edge_count() const;
};

/// Path-like groups remove nodes, spot-like groups remove edges, restricted
/// to the given window layers (edges leaving those layers).
BlockedSets build_blocked_sets(const Lattice& g, std::span<const int> window_layers, const ObstacleSet& obs,
                               double veh_radius);

}  // namespace raceplan
