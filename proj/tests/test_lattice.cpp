#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <queue>

#include "raceplan/errors.hpp"
#include "raceplan/graph_io.hpp"
#include "raceplan/lattice.hpp"
#include "support.hpp"

using namespace raceplan;

namespace {

std::vector<double> gaps(const std::vector<double>& layers, double lap) {
  std::vector<double> out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.push_back((i + 1 < layers.size() ? layers[i + 1] : lap) - layers[i]);
  }
  return out;
}

LatticeNode bare_node(int layer, int lat_idx) {
  LatticeNode n;
  n.layer = layer;
  n.lat_idx = lat_idx;
  n.l = 0.5 * lat_idx;
  n.s = 10.0 * layer;
  return n;
}

LatticeEdge bare_edge(int from, int to) {
  LatticeEdge e;
  e.from = from;
  e.to = to;
  return e;
}

}  // namespace

TEST_CASE("layer placement") {
  const GraphParams p;
  SUBCASE("straight loop of 300 m") {
    const auto line = rp_test::flat_loop(300.0);
    const auto layers = place_layers(line, p);
    REQUIRE(layers.size() == 10);
    for (double g : gaps(layers, line.lap_length())) CHECK(g == doctest::Approx(30.0));
  }
  SUBCASE("circle above the curvature threshold") {
    const auto line = rp_test::circle_line(50.0, 2000);
    const auto layers = place_layers(line, p);
    const auto g = gaps(layers, line.lap_length());
    for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(g[i] == doctest::Approx(6.0));
    CHECK(g.back() >= p.long_sep_curve);
    CHECK(g.back() <= p.long_sep_straight);
  }
  SUBCASE("lap not a multiple of the spacing") {
    const auto line = rp_test::flat_loop(100.0);
    const auto g = gaps(place_layers(line, p), line.lap_length());
    CHECK(std::accumulate(g.begin(), g.end(), 0.0) == doctest::Approx(100.0));
    for (double x : g) {
      CHECK(x >= 6.0);
      CHECK(x <= 30.0);
    }
  }
  SUBCASE("airfield: dense in the turns, sparse on the straights") {
    const auto& line = rp_test::airfield();
    const auto layers = place_layers(line, p);
    const auto g = gaps(layers, line.lap_length());
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(g[i] >= 6.0 - 1e-9);
      CHECK(g[i] <= 30.0 + 1e-9);
      if (std::abs(line.curvature(layers[i])) >= 0.015) CHECK(g[i] == doctest::Approx(6.0));
    }
    CHECK(g[3] == doctest::Approx(30.0));
  }
}

TEST_CASE("layer sampling") {
  GraphParams p;
  p.veh_width = 1.5;
  SUBCASE("7 nodes on a 4.5 m track") {
    const auto line = rp_test::flat_loop(300.0, 2.25);
    const auto nodes = sample_layer(line, 50.0, p);
    REQUIRE(nodes.size() == 7);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      CHECK(nodes[i].l == doctest::Approx(-1.5 + 0.5 * static_cast<double>(i)));
      CHECK(nodes[i].lat_idx == static_cast<int>(i) - 3);
    }
  }
  SUBCASE("headings at the ends of the interpolation") {
    // margin lands exactly on a node: w = 2.25 + 0.75 keeps l = 2.25 admissible
    const auto line = rp_test::circle_line(40.0, 2000, 3.0);
    const double s = 30.0;
    const auto nodes = sample_layer(line, s, p);
    for (const auto& n : nodes) {
      if (n.lat_idx == 0) CHECK(n.pose.theta == doctest::Approx(line.heading(s)).epsilon(1e-12));
      if (n.l == doctest::Approx(2.25)) CHECK(n.pose.theta == doctest::Approx(line.bound_heading(s, Side::kLeft)).epsilon(1e-12));
      if (n.l == doctest::Approx(-2.25)) CHECK(n.pose.theta == doctest::Approx(line.bound_heading(s, Side::kRight)).epsilon(1e-12));
    }
    CHECK(nodes.front().l == doctest::Approx(-2.0));
  }
  SUBCASE("track narrower than the vehicle") {
    const auto line = rp_test::flat_loop(300.0, 0.7);
    CHECK_THROWS_AS(sample_layer(line, 10.0, p), GeometryError);
  }
}

TEST_CASE("edge generation") {
  SUBCASE("lateral reach on a straight") {
    GraphParams p;
    p.lat_ratio_max = 0.17;
    const auto line = rp_test::flat_loop(300.0, 8.0);
    // two layers 30 m apart on the long straight side
    Lattice g;
    g.params = p;
    g.ref = line;
    g.cyclic = false;
    g.lap_length = line.lap_length();
    g.layer_s = {30.0, 60.0};
    g.nodes = sample_layer(line, 30.0, p, 0);
    for (const auto& n : sample_layer(line, 60.0, p, 1)) g.nodes.push_back(n);
    g.reindex();
    g.edges = build_edges(g);
    g.reindex();
    int checked = 0;
    for (const auto& a : g.layer_nodes(0)) {
      for (const auto& b : g.layer_nodes(1)) {
        const int ia = static_cast<int>(&a - g.nodes.data());
        const int ib = static_cast<int>(&b - g.nodes.data());
        bool linked = false;
        for (const auto& e : g.out_edges(ia)) linked |= e.to == ib;
        CHECK(linked == (std::abs(b.l - a.l) <= 5.1 + 1e-9));
        ++checked;
      }
    }
    CHECK(checked > 100);
  }
  SUBCASE("turn radius limit") {
    GraphParams p;
    LatticeNode a, b;
    a.pose = Pose{0, 0, 0};
    b.pose = Pose{3, 3, std::numbers::pi / 2};
    b.layer = 1;
    LatticeEdge e;
    CHECK_FALSE(make_edge(a, b, 0, 1, p, e));
    // dense independent sampling of the same fit shows the violation
    const auto seg = fit_c1_segment(a.pose, b.pose);
    double k_max = 0.0;
    for (int i = 0; i <= 1000; ++i) k_max = std::max(k_max, std::abs(seg.curvature(i / 1000.0)));
    CHECK(k_max > 1.0 / p.r_min);
    p.r_min = 1.0;
    CHECK(make_edge(a, b, 0, 1, p, e));
  }
  SUBCASE("race line on a straight costs nothing") {
    const auto& g = rp_test::airfield_lattice();
    for (int v = g.layer_begin[1]; v < g.layer_begin[2]; ++v) {
      if (!g.nodes[v].on_raceline()) continue;
      for (const auto& e : g.out_edges(v)) {
        if (g.nodes[e.to].on_raceline()) CHECK(e.cost == 0.0);
      }
    }
  }
}

TEST_CASE("edge cost") {
  GraphParams p;
  CHECK(edge_cost(30.0, 0.01, 0.005, 1.0, p) == doctest::Approx(183.75).epsilon(1e-15));
  CHECK(edge_cost(30.0, 0.0, 0.0, 0.0, p) == 0.0);
  CHECK(edge_cost(60.0, 0.01, 0.005, -1.0, p) == 2.0 * edge_cost(30.0, 0.01, 0.005, 1.0, p));
  CHECK(edge_cost(12.0, 0.02, 0.0, 0.0, p) == 12.0 * 7500.0 * 0.02 * 0.02);
}

TEST_CASE("pruning") {
  SUBCASE("dead end in a three-layer graph") {
    Lattice g;
    g.cyclic = false;
    g.layer_s = {0.0, 10.0, 20.0};
    g.nodes = {bare_node(0, 0), bare_node(0, 1), bare_node(1, 0), bare_node(1, 1), bare_node(2, 0), bare_node(2, 1)};
    g.edges = {bare_edge(0, 2), bare_edge(0, 3), bare_edge(1, 2), bare_edge(1, 3), bare_edge(2, 4), bare_edge(2, 5)};
    g.reindex();
    const auto h = prune(g);
    CHECK(h.nodes.size() == 5);
    CHECK(h.edges.size() == 4);
    for (const auto& n : h.nodes) CHECK_FALSE((n.layer == 1 && n.lat_idx == 1));
  }
  SUBCASE("connected lattice is a fixpoint") {
    const auto& g = rp_test::airfield_lattice();
    CHECK(same_graph(prune(g), g));
  }
  SUBCASE("no edges at all") {
    Lattice g;
    g.cyclic = true;
    g.layer_s = {0.0, 10.0};
    g.nodes = {bare_node(0, 0), bare_node(1, 0)};
    g.reindex();
    CHECK_THROWS_AS(prune(g), UntraversableError);
  }
}

TEST_CASE("airfield lattice invariants") {
  const auto& g = rp_test::airfield_lattice();
  const auto& p = g.params;
  REQUIRE(g.cyclic);

  // every node lies on a cycle through the lap
  std::vector<char> on_cycle(g.nodes.size(), 0);
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    if (on_cycle[v]) continue;
    std::vector<char> seen(g.nodes.size(), 0);
    std::queue<int> q;
    for (const auto& e : g.out_edges(static_cast<int>(v))) q.push(e.to);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      if (seen[u]) continue;
      seen[u] = 1;
      for (const auto& e : g.out_edges(u)) q.push(e.to);
    }
    on_cycle[v] = seen[v];
  }
  CHECK(std::all_of(on_cycle.begin(), on_cycle.end(), [](char c) { return c != 0; }));

  for (const auto& e : g.edges) {
    CHECK(g.nodes[e.to].layer == g.next_layer(g.nodes[e.from].layer));
    CHECK(e.cost == edge_cost(e.s_len, e.kappa_avg, e.kappa_range, g.nodes[e.to].l, p));
    CHECK(e.sampled.kappa.abs().maxCoeff() <= 1.0 / p.r_min);
    double mean = e.sampled.kappa.abs().mean();
    CHECK(e.kappa_avg == doctest::Approx(mean).epsilon(1e-12));
    CHECK(e.kappa_range == doctest::Approx(e.sampled.kappa.maxCoeff() - e.sampled.kappa.minCoeff()).epsilon(1e-12));
  }
  for (const auto& n : g.nodes) {
    const auto q = g.ref.interpolate(n.s);
    CHECK(n.l <= q.w_left - 0.5 * p.veh_width + 1e-9);
    CHECK(n.l >= -q.w_right + 0.5 * p.veh_width - 1e-9);
  }
  for (int layer = 0; layer < g.num_layers(); ++layer) {
    CHECK(g.layer_gap(layer) >= p.long_sep_curve - 1e-9);
    CHECK(g.layer_gap(layer) <= p.long_sep_straight + 1e-9);
  }
}

TEST_CASE("graph file") {
  const auto& g = rp_test::airfield_lattice();
  const auto bytes = serialize_graph(g);
  CHECK(bytes.substr(0, 4) == "LATG");

  SUBCASE("round trip") { CHECK(same_graph(deserialize_graph(bytes), g)); }
  SUBCASE("deterministic build") {
    const auto again = build_lattice(rp_test::airfield(), GraphParams{});
    CHECK(serialize_graph(again) == bytes);
  }
  SUBCASE("version mismatch") {
    auto bad = bytes;
    bad[4] = static_cast<char>(kGraphFormatVersion + 1);
    CHECK_THROWS_AS(deserialize_graph(bad), GraphVersionError);
  }
  SUBCASE("truncated") {
    CHECK_THROWS_AS(deserialize_graph(std::string_view(bytes).substr(0, bytes.size() / 2)), GraphTruncatedError);
    CHECK_THROWS_AS(deserialize_graph(std::string_view(bytes).substr(0, bytes.size() - 1)), GraphTruncatedError);
  }
  SUBCASE("bad magic") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize_graph(bad), GraphFileError);
  }
  SUBCASE("race line hash checked against the csv") {
    const auto dir = std::filesystem::temp_directory_path() / "raceplan_graph_test";
    std::filesystem::create_directories(dir);
    const auto csv = format_reference_line(rp_test::airfield());
    std::ofstream(dir / "line.csv", std::ios::binary) << csv;
    const auto hashed = build_lattice(rp_test::airfield(), GraphParams{}, fnv1a64(csv));
    save_graph(hashed, dir / "g.latg");
    CHECK(same_graph(load_graph(dir / "g.latg", dir / "line.csv"), hashed));
    std::ofstream(dir / "line.csv", std::ios::binary) << csv << "# edited\n";
    CHECK_THROWS_AS(load_graph(dir / "g.latg", dir / "line.csv"), GraphHashError);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("graph parameter file") {
  const auto p = parse_graph_params("[graph]\nlat_sep = 0.25\nw_rl = 2\n");
  CHECK(p.lat_sep == 0.25);
  CHECK(p.w_rl == 2.0);
  CHECK(p.long_sep_straight == 30.0);
  CHECK_THROWS_AS(parse_graph_params("[graph]\nbogus = 1\n"), InputError);
  CHECK_THROWS_AS(parse_graph_params("[graph]\nlat_sep = -1\n"), InputError);
}
