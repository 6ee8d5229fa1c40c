#include "raceplan/sim/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "raceplan/errors.hpp"
#include "raceplan/sim/simulator.hpp"

namespace raceplan::sim {

std::vector<PlanRequest> bench_workload(const Lattice& g, const BenchOptions& opt, const PlannerConfig& cfg) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };
  const double lap = g.ref.lap_length();

  std::vector<PlanRequest> out;
  out.reserve(static_cast<std::size_t>(opt.cycles));
  for (int i = 0; i < opt.cycles; ++i) {
    PlanRequest r;
    r.horizon = opt.horizon;
    r.ego_s = uniform(0.0, lap);
    r.ego_l = uniform(-1.0, 1.0);
    r.ego_v = uniform(10.0, std::min(40.0, cfg.friction.v_cap));
    r.ego_heading = g.ref.heading(r.ego_s);
    for (int k = 0; k < opt.obstacles; ++k) {
      const double s = r.ego_s + uniform(40.0, 0.9 * opt.horizon);
      const auto p = g.ref.interpolate(s);
      const double l = uniform(-0.8 * p.w_right, 0.8 * p.w_left);
      const Vec2 c = g.ref.to_cartesian(s, l);
      r.obstacles.add_circle(c.x(), c.y(), 1.0);
    }
    if (opt.lead) {
      LeadState lead{g.ref.wrap(r.ego_s + uniform(20.0, 120.0)), 0.0, uniform(10.0, 25.0)};
      r.lead = lead;
      add_lead_obstacles(r.obstacles, g.ref, lead, cfg);
    }
    out.push_back(std::move(r));
  }
  return out;
}

BenchResult run_bench(const Lattice& g, const BenchOptions& opt, const PlannerConfig& cfg) {
  const auto work = bench_workload(g, opt, cfg);
  BenchResult res;
  res.cycle_ms.reserve(work.size());
  for (const auto& req : work) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (plan_cycle(g, req, cfg).empty()) ++res.empty;
    } catch (const NoFeasibleStartError&) {
      ++res.no_start;
    }
    res.cycle_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  const auto st = timing_stats(res.cycle_ms);
  res.mean_ms = st.mean;
  res.p50_ms = st.p50;
  res.p99_ms = st.p99;
  res.hz = st.mean > 0.0 ? 1000.0 / st.mean : 0.0;
  return res;
}

}  // namespace raceplan::sim
