// raceplan command-line driver: offline graph build, single planning cycles,
// closed-loop scenario runs and timing benchmarks.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "raceplan/csv.hpp"
#include "raceplan/errors.hpp"
#include "raceplan/graph_io.hpp"
#include "raceplan/lattice.hpp"
#include "raceplan/online_planner.hpp"
#include "raceplan/sim/bench.hpp"
#include "raceplan/sim/scenario.hpp"
#include "raceplan/sim/simulator.hpp"
#include "raceplan/sim/svg.hpp"
#include "raceplan/sim/track_gen.hpp"
#include "raceplan/sim/trace.hpp"

namespace fs = std::filesystem;
using namespace raceplan;

namespace {

constexpr int kOk = 0;
constexpr int kDegraded = 2;
constexpr int kInputError = 3;

std::vector<double> parse_triple(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(csv::parse_double(item, what, 1));
  if (out.size() != 3) throw InputError(what + " expects three comma-separated numbers");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
}

std::string trajectory_csv(const Trajectory& t) {
  std::string out = "s_m,x_m,y_m,psi_rad,kappa_radpm,vx_mps,ax_mps2\n";
  const auto& p = t.path;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    out += csv::format_double(p.s[k]) + ',' + csv::format_double(p.x[k]) + ',' + csv::format_double(p.y[k]) + ',' +
           csv::format_double(p.psi[k]) + ',' + csv::format_double(p.kappa[k]) + ',' +
           csv::format_double(t.profile.v[k]) + ',' + csv::format_double(t.profile.a[k]) + '\n';
  }
  return out;
}

ObstacleSet load_obstacles(const fs::path& path) {
  const auto t = csv::parse(csv::read_file(path), path.string());
  const auto cx = t.require_column("x_m");
  const auto cy = t.require_column("y_m");
  const auto cr = t.require_column("r_m");
  ObstacleSet obs;
  for (const auto& row : t.rows) {
    const double r = t.number(row, cr);
    if (!(r > 0.0)) throw ParseError(path.string(), row.line, "radius must be positive");
    obs.add_circle(t.number(row, cx), t.number(row, cy), r);
  }
  return obs;
}

int cmd_make_track(const fs::path& out, const sim::AirfieldParams& p) {
  const auto line = sim::make_airfield(p);
  write_text(out, format_reference_line(line));
  std::printf("track: %zu points, lap %.3f m\n", line.size(), line.lap_length());
  return kOk;
}

int cmd_build_graph(const fs::path& raceline, const fs::path& track, const fs::path& params, const fs::path& out) {
  const auto text = csv::read_file(raceline);
  auto line = parse_reference_line(text, raceline.string());
  if (!track.empty()) line = rebase_bounds(line, load_reference_line(track));
  const auto gp = params.empty() ? GraphParams{} : load_graph_params(params);
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = build_lattice(line, gp, fnv1a64(text));
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  save_graph(g, out);
  std::printf("layers %d nodes %zu edges %zu build_ms %.1f\n", g.num_layers(), g.nodes.size(), g.edges.size(), ms);
  return kOk;
}

int cmd_plan(const fs::path& graph, const fs::path& raceline, const std::string& ego_text, const fs::path& obstacles,
             const std::string& lead_text, double horizon, const fs::path& out) {
  const auto g = raceline.empty() ? load_graph(graph) : load_graph(graph, raceline);
  const auto ego = parse_triple(ego_text, "--ego");
  PlannerConfig cfg;
  PlanRequest req;
  req.ego_s = ego[0];
  req.ego_l = ego[1];
  req.ego_v = ego[2];
  req.horizon = horizon;
  if (!obstacles.empty()) req.obstacles = load_obstacles(obstacles);
  if (!lead_text.empty()) {
    const auto l = parse_triple(lead_text, "--lead");
    req.lead = LeadState{l[0], l[1], l[2]};
    sim::add_lead_obstacles(req.obstacles, g.ref, *req.lead, cfg);
  }

  ActionSet actions;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    actions = plan_cycle(g, req, cfg);
  } catch (const NoFeasibleStartError& e) {
    std::printf("degraded: %s\n", e.what());
    return kDegraded;
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  if (!out.empty()) fs::create_directories(out);
  for (const auto& [name, list] : actions.primitives) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& t = list[i];
      if (!out.empty()) write_text(out / (name + (i ? "_" + std::to_string(i) : "") + ".csv"), trajectory_csv(t));
      std::printf("%s cost %.4f length %.2f v %.2f..%.2f cycle_ms %.2f%s\n", name.c_str(), t.cost, t.path.length(),
                  t.profile.v.minCoeff(), t.profile.v.maxCoeff(), ms, t.following ? " following" : "");
    }
  }
  if (actions.empty()) {
    std::printf("degraded: empty action set, cycle_ms %.2f\n", ms);
    return kDegraded;
  }
  return kOk;
}

int cmd_simulate(const fs::path& scenario, const fs::path& out, int snapshot_every) {
  const auto sc = sim::load_scenario(scenario);
  const auto g = sim::scenario_lattice(sc);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = sim::simulate(sc, g);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out);
  sim::write_trace(res.trace, out / "trace.csv");
  write_text(out / "plot.svg", sim::render_svg(sc, g.ref, res));

  std::string snaps = "t_s,primitive,s_m,x_m,y_m,psi_rad,kappa_radpm,vx_mps,ax_mps2\n";
  for (std::size_t i = 0, k = 0; i < res.trace.size() && k < res.snapshots.size(); ++i) {
    if (res.trace[i].primitive == "none") continue;
    const auto& tr = res.snapshots[k++];
    if (i % static_cast<std::size_t>(snapshot_every) != 0) continue;
    const auto body = trajectory_csv(tr);
    std::stringstream ss(body);
    std::string row;
    std::getline(ss, row);
    while (std::getline(ss, row)) snaps += csv::format_double(res.trace[i].t) + ',' + tr.primitive + ',' + row + '\n';
  }
  write_text(out / "snapshots.csv", snaps);

  std::vector<double> ms;
  for (const auto& r : res.trace) ms.push_back(r.cycle_ms);
  const auto st = sim::timing_stats(ms);
  nlohmann::json j;
  j["scenario"] = sc.name;
  j["ticks"] = res.trace.size();
  j["degraded_ticks"] = res.degraded_ticks;
  j["collision"] = res.collision;
  j["min_clearance_m"] = res.min_clearance;
  j["speed_violations"] = res.speed_violations;
  j["infeasible_entries"] = res.infeasible_entries;
  j["max_lat_ratio"] = res.max_lat_ratio;
  j["overtake_in_curve_ticks"] = res.overtake_in_curve;
  j["first_overtake_t_s"] = res.first_overtake_t;
  j["zone_active_at_s"] = res.zone_active_at;
  j["max_abs_l_m"] = res.max_abs_l;
  j["final_l_m"] = res.final_l;
  j["passes"] = nlohmann::json::array();
  for (const auto& p : res.passes) j["passes"].push_back({{"t_s", p.t}, {"lead_s_m", p.lead_s}, {"lead_kappa", p.lead_kappa}});
  j["cycle_ms"] = {{"mean", st.mean}, {"p50", st.p50}, {"p99", st.p99}, {"max", st.max}};
  j["wall_s"] = wall;
  write_text(out / "summary.json", j.dump(2) + "\n");

  std::printf("ticks %zu degraded %d collision %s min_clearance %.3f passes %zu\n", res.trace.size(),
              res.degraded_ticks, res.collision ? "yes" : "no", res.min_clearance, res.passes.size());
  std::printf("cycle_ms mean %.2f p50 %.2f p99 %.2f max %.2f\n", st.mean, st.p50, st.p99, st.max);
  return res.degraded_ticks > 0 ? kDegraded : kOk;
}

int cmd_bench(const fs::path& graph, const sim::BenchOptions& opt) {
  const auto g = load_graph(graph);
  const auto r = sim::run_bench(g, opt);
  std::printf("cycles %d obstacles %d lead %s\n", opt.cycles, opt.obstacles, opt.lead ? "yes" : "no");
  std::printf("mean_ms %.3f p50_ms %.3f p99_ms %.3f hz %.1f no_start %d empty %d\n", r.mean_ms, r.p50_ms, r.p99_ms,
              r.hz, r.no_start, r.empty);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based local trajectory planner for race vehicles"};
  app.require_subcommand(1);

  fs::path out, raceline, track, params, graph, obstacles, scenario;
  std::string ego, lead;
  double horizon = 200.0;
  int snapshot_every = 10;  // one snapshot per second at the default period
  sim::AirfieldParams airfield;
  sim::BenchOptions bench;

  auto* mk = app.add_subcommand("make-track", "Write the synthetic airfield race line");
  mk->add_option("--out", out, "Output CSV")->required();
  mk->add_option("--straight", airfield.straight, "Straight length [m]");
  mk->add_option("--radius", airfield.radius, "Turn radius [m]");
  mk->add_option("--transition", airfield.transition, "Clothoid length at each turn end [m]");
  mk->add_option("--half-width", airfield.half_width, "Half width on the straights [m]");
  mk->add_option("--half-width-curve", airfield.half_width_curve, "Half width in the turns [m]");

  auto* bg = app.add_subcommand("build-graph", "Build and save the offline lattice");
  bg->add_option("--raceline", raceline, "Race line CSV")->required();
  bg->add_option("--track", track, "Track centerline CSV supplying the bounds");
  bg->add_option("--params", params, "Graph parameter file");
  bg->add_option("--out", out, "Output graph file")->required();

  auto* pl = app.add_subcommand("plan", "Run one planning cycle");
  pl->add_option("--graph", graph, "Graph file")->required();
  pl->add_option("--raceline", raceline, "Race line CSV the graph must match");
  pl->add_option("--ego", ego, "s,l,v")->required();
  pl->add_option("--obstacles", obstacles, "CSV with x_m,y_m,r_m");
  pl->add_option("--lead", lead, "s,l,v of a lead vehicle");
  pl->add_option("--horizon", horizon, "Planning horizon [m]");
  pl->add_option("--out", out, "Directory for trajectory CSVs");

  auto* si = app.add_subcommand("simulate", "Closed-loop scenario run");
  si->add_option("--scenario", scenario, "Scenario file")->required();
  si->add_option("--out", out, "Output directory")->required();
  si->add_option("--snapshot-every", snapshot_every, "Write the chosen trajectory every N ticks")
      ->check(CLI::PositiveNumber);

  auto* be = app.add_subcommand("bench", "Time planning cycles on a seeded workload");
  be->add_option("--graph", graph, "Graph file")->required();
  be->add_option("--cycles", bench.cycles, "Number of cycles");
  be->add_option("--seed", bench.seed, "Workload seed");
  be->add_option("--obstacles", bench.obstacles, "Static obstacles per cycle")->check(CLI::Range(0, 3));
  be->add_flag("--lead", bench.lead, "Add a lead vehicle");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mk) return cmd_make_track(out, airfield);
    if (*bg) return cmd_build_graph(raceline, track, params, out);
    if (*pl) return cmd_plan(graph, raceline, ego, obstacles, lead, horizon, out);
    if (*si) return cmd_simulate(scenario, out, snapshot_every);
    if (*be) return cmd_bench(graph, bench);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kOk;
}
