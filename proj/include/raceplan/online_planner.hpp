#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raceplan/collision.hpp"
#include "raceplan/lattice.hpp"
#include "raceplan/spline.hpp"
#include "raceplan/velocity.hpp"

namespace raceplan {

inline const std::string kStraight = "straight";
inline const std::string kLeft = "left";
inline const std::string kRight = "right";

struct PlannerConfig {
  FrictionParams friction;
  FollowParams follow;
  FrictionMap friction_map;
  double t_calc = 0.1;             // calculation-time lookahead [s]
  double veh_length = 4.7;         // [m]
  double veh_width = 1.9;          // [m]
  double veh_radius = 0.5 * std::hypot(4.7, 1.9);  // half diagonal [m]
  double plan_margin = 0.25;       // extra clearance used while searching [m]
  double sample_step = 0.5;        // trajectory sample spacing [m]
  double waypoint_spacing = 6.0;   // chain waypoints along the guide [m]
  double prediction_time = 0.2;    // constant-velocity lead prediction [s]
  double lead_rear_clearance = 9.4;  // a lead this far behind still shapes the overtake [m]
  double lateral_margin = 0.01;    // share of the lateral limit kept back in planned profiles
};

struct LeadState {
  double s = 0.0;
  double l = 0.0;
  double v = 0.0;
};

struct PlanRequest {
  double ego_s = 0.0;
  double ego_l = 0.0;
  double ego_v = 0.0;
  std::optional<double> ego_heading;  // defaults to the reference heading at ego_s
  std::optional<double> ego_kappa;    // path curvature at the ego; seeds the chain start when given
  ObstacleSet obstacles;
  std::optional<LeadState> lead;
  double horizon = 200.0;
  // Nodes of the trajectory being executed. Its node in the start layer, if
  // admissible, is kept as start node so consecutive plans agree.
  std::vector<int> previous_nodes;
  // Chain of that trajectory from the ego onward. When it passes the start
  // node, it replaces the fitted piece from the ego to the start node.
  std::vector<CubicSegment> previous_path;
};

struct NodeTemplate {
  std::vector<int> window;  // layer indices, in driving order, wrapped
  BlockedSets blocked;      // static and zone obstacles
  int start_node = -1;
  int goal_layer = -1;
};

struct SearchResult {
  std::vector<int> nodes;  // start node to goal node
  double cost = 0.0;       // edge costs plus the virtual goal edge
};

struct Trajectory {
  std::string primitive;
  std::vector<int> nodes;
  double cost = 0.0;
  std::vector<CubicSegment> segments;
  SampledPath path;
  VelocityProfile profile;
  bool following = false;  // velocity limited by the lead vehicle
};

struct ActionSet {
  std::map<std::string, std::vector<Trajectory>> primitives;

  bool empty() const { return primitives.empty(); }
  std::size_t size() const;
  const Trajectory* find(const std::string& name) const;
  bool operator==(const ActionSet& other) const;
};

bool operator==(const Trajectory& a, const Trajectory& b);

/// Layers from the first one ahead of the predicted ego station up to the
/// first one at least `horizon` ahead, plus the static/zone overlay and the
/// start node. Throws InputError when the ego is off track and
/// NoFeasibleStartError when every start-layer node is blocked.
NodeTemplate make_node_template(const Lattice& g, const PlanRequest& req, const PlannerConfig& cfg = {});

/// Overlay per primitive. "straight" keeps the template's overlay; "left" and
/// "right" add dynamic obstacles and close the lead's side of every layer
/// between one layer gap behind the lead and the station where the ego, at
/// its current speed, would be clear ahead of it (constant-velocity lead).
/// Without a lead only "straight" is returned.
std::map<std::string, BlockedSets> make_action_templates(const NodeTemplate& tpl, const std::optional<LeadState>& lead,
                                                         const Lattice& g, const PlanRequest& req,
                                                         const PlannerConfig& cfg = {});

/// Layer-ordered relaxation from `start_node` through `window` to a virtual
/// goal node behind the last window layer. Ties go to the predecessor with
/// smaller |lat_idx|, then the lower node index.
std::optional<SearchResult> shortest_path(const Lattice& g, const std::vector<int>& window, const BlockedSets& blocked,
                                          int start_node);

/// C2 chain from the ego position through the node positions.
std::vector<CubicSegment> assemble_segments(const Lattice& g, const std::vector<int>& nodes, const Pose& ego,
                                            std::optional<double> ego_kappa = std::nullopt);
SampledPath assemble_path(const Lattice& g, const std::vector<int>& nodes, const Pose& ego, double step = 0.5,
                          std::optional<double> ego_kappa = std::nullopt);

Pose ego_pose(const Lattice& g, const PlanRequest& req);

ActionSet plan_cycle(const Lattice& g, const PlanRequest& req, const PlannerConfig& cfg = {});

}  // namespace raceplan
