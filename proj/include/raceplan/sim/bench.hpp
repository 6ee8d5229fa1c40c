#pragma once

#include <cstdint>
#include <vector>

#include "raceplan/online_planner.hpp"

namespace raceplan::sim {

struct BenchOptions {
  int cycles = 1000;
  std::uint64_t seed = 1;
  int obstacles = 0;   // static obstacles per cycle
  bool lead = false;   // one lead vehicle ahead
  double horizon = 200.0;
};


struct BenchResult {
  std::vector<double> cycle_ms;
  int no_start = 0;  // cycles without a feasible start
  int empty = 0;     // cycles with an empty action set
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  double hz = 0.0;
};

/// Seeded random requests: ego pose and speed, obstacles ahead, optional lead.
std::vector<PlanRequest> bench_workload(const Lattice& g, const BenchOptions& opt, const PlannerConfig& cfg = {});

BenchResult run_bench(const Lattice& g, const BenchOptions& opt, const PlannerConfig& cfg = {});

}  // namespace raceplan::sim
