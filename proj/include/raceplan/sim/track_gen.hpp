#pragma once

#include "raceplan/ref_line.hpp"
#include "raceplan/velocity.hpp"

namespace raceplan::sim {

/// Oval of two straights joined by left-hand half turns, driven counter-clockwise
/// from the start of the lower straight. Each turn is an arc entered and left
/// through clothoids, so the curvature is continuous. The race line is the
/// centerline.
struct AirfieldParams {
  double straight = 500.0;      // [m]
  double radius = 50.0;         // [m]
  double transition = 30.0;     // clothoid length at either end of a turn [m]
  double half_width = 10.0;     // on the straights [m]
  double half_width_curve = 4.5;  // in the turns [m]
  double taper = 40.0;          // width transition length on the straights [m]
  double spacing = 1.0;         // max point spacing [m]
  FrictionParams friction;      // race-line velocity
};

ReferenceLine make_airfield(const AirfieldParams& p = {});

/// Closed-lap speed profile on the reference line: curvature-limited and
/// acceleration-limited, computed over three laps and read off the middle one.
std::vector<double> lap_speed_profile(const ReferenceLine& line, const FrictionParams& p);

}  // namespace raceplan::sim
