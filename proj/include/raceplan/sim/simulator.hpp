#pragma once

#include <optional>
#include <string>
#include <vector>

#include "raceplan/lattice.hpp"
#include "raceplan/online_planner.hpp"
#include "raceplan/sim/scenario.hpp"
#include "raceplan/sim/trace.hpp"

namespace raceplan::sim {

/// Current footprint (spot-like) and constant-velocity prediction (path-like) of a lead vehicle.
void add_lead_obstacles(ObstacleSet& obs, const ReferenceLine& line, const LeadState& lead, const PlannerConfig& cfg);

struct PositionSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct PassEvent {
  double t = 0.0;
  double lead_s = 0.0;       // lead station when the ego got ahead
  double lead_kappa = 0.0;   // reference curvature there
};

struct SimResult {
  std::vector<TraceRecord> trace;
  std::vector<PositionSample> ego_path;   // every 10 ms
  std::vector<PositionSample> lead_path;  // every 10 ms
  std::vector<Trajectory> snapshots;      // chosen trajectory per tick
  std::vector<double> zone_active_at;     // activation time per zone, or -1

  int degraded_ticks = 0;
  bool collision = false;
  double min_clearance = 0.0;   // over the 10 ms sweep, ego circle to obstacle circles [m]
  int speed_violations = 0;     // ticks above the cap or the friction envelope
  int infeasible_entries = 0;   // chosen profiles that start above their braking envelope
  double max_lat_ratio = 0.0;   // max kappa v^2 / a_lat over the 10 ms sweep
  int overtake_in_curve = 0;    // ticks choosing left/right while the lead is in a curve
  double first_overtake_t = -1.0;
  std::vector<PassEvent> passes;
  double max_abs_l = 0.0;
  double final_l = 0.0;
};

/// Closed-loop run at the scenario's planner period with ideal tracking.
SimResult simulate(const Scenario& sc, const Lattice& g);

/// Lattice for a scenario: the prebuilt graph if given, else built from its inputs.
Lattice scenario_lattice(const Scenario& sc);

struct TimingStats {
  double mean = 0.0;
  double p50 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};
TimingStats timing_stats(std::vector<double> ms);

}  // namespace raceplan::sim
