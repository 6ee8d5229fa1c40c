#pragma once

#include <string>

#include "raceplan/sim/scenario.hpp"
#include "raceplan/sim/simulator.hpp"

namespace raceplan::sim {

/// Track bounds, race line, obstacles, zones and ego/lead samples spaced by sc.plot_spacing.
std::string render_svg(const Scenario& sc, const ReferenceLine& line, const SimResult& result);

}  // namespace raceplan::sim
