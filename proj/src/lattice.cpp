#include "raceplan/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <tuple>

#include "raceplan/csv.hpp"
#include "raceplan/errors.hpp"
#include "raceplan/kv.hpp"

namespace raceplan {
namespace {

double max_abs_curvature(const ReferenceLine& line, double s0, double len) {
  double m = std::max(std::abs(line.curvature(s0)), std::abs(line.curvature(s0 + len)));
  const auto& pts = line.points();
  std::size_t i = line.segment_index(s0);
  // walk the discrete points inside (s0, s0 + len]
  double travelled = line.segment_end(i) - line.wrap(s0);
  while (travelled < len) {
    i = (i + 1) % pts.size();
    m = std::max(m, std::abs(pts[i].kappa));
    travelled += line.segment_end(i) - pts[i].s;
  }
  return m;
}

}  // namespace

void validate(const GraphParams& p) {
  if (!(p.lat_sep > 0 && p.long_sep_straight > 0 && p.long_sep_curve > 0 && p.sample_spacing > 0)) {
    throw InputError("graph params: separations must be positive");
  }
  if (p.long_sep_curve > p.long_sep_straight) throw InputError("graph params: curve separation exceeds straight");
  if (p.w_len < 0 || p.w_kappa_avg < 0 || p.w_kappa_range < 0 || p.w_rl < 0) {
    throw InputError("graph params: weights must be non-negative");
  }
  if (!(p.lat_ratio_max > 0 && p.r_min > 0 && p.veh_width > 0 && p.min_horizon > 0)) {
    throw InputError("graph params: vehicle limits must be positive");
  }
}

GraphParams parse_graph_params(std::string_view text, const std::string& source) {
  GraphParams p;
  const auto sections = kv::parse(text, source);
  for (const auto& sec : sections) {
    if (!sec.name.empty() && sec.name != "graph") throw ParseError(source, sec.line, "unexpected section");
    sec.restrict_keys({"lat_sep", "long_sep_straight", "long_sep_curve", "kappa_curve_thresh", "min_horizon", "w_len",
                       "w_kappa_avg", "w_kappa_range", "w_rl", "lat_ratio_max", "r_min", "veh_width",
                       "sample_spacing"});
    p.lat_sep = sec.number("lat_sep", p.lat_sep);
    p.long_sep_straight = sec.number("long_sep_straight", p.long_sep_straight);
    p.long_sep_curve = sec.number("long_sep_curve", p.long_sep_curve);
    p.kappa_curve_thresh = sec.number("kappa_curve_thresh", p.kappa_curve_thresh);
    p.min_horizon = sec.number("min_horizon", p.min_horizon);
    p.w_len = sec.number("w_len", p.w_len);
    p.w_kappa_avg = sec.number("w_kappa_avg", p.w_kappa_avg);
    p.w_kappa_range = sec.number("w_kappa_range", p.w_kappa_range);
    p.w_rl = sec.number("w_rl", p.w_rl);
    p.lat_ratio_max = sec.number("lat_ratio_max", p.lat_ratio_max);
    p.r_min = sec.number("r_min", p.r_min);
    p.veh_width = sec.number("veh_width", p.veh_width);
    p.sample_spacing = sec.number("sample_spacing", p.sample_spacing);
  }
  validate(p);
  return p;
}

GraphParams load_graph_params(const std::filesystem::path& path) {
  return parse_graph_params(csv::read_file(path), path.string());
}

double Lattice::layer_gap(int layer) const {
  const int next = layer + 1;
  if (next < num_layers()) return layer_s[next] - layer_s[layer];
  return lap_length - layer_s[layer] + layer_s[0];
}

void Lattice::reindex() {
  std::stable_sort(edges.begin(), edges.end(),
                   [](const LatticeEdge& a, const LatticeEdge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  layer_begin.assign(layer_s.size() + 1, 0);
  for (const auto& n : nodes) ++layer_begin[n.layer + 1];
  for (std::size_t i = 1; i < layer_begin.size(); ++i) layer_begin[i] += layer_begin[i - 1];
  out_begin.assign(nodes.size() + 1, 0);
  for (const auto& e : edges) ++out_begin[e.from + 1];
  for (std::size_t i = 1; i < out_begin.size(); ++i) out_begin[i] += out_begin[i - 1];
}

bool same_graph(const Lattice& a, const Lattice& b) {
  return a.params == b.params && a.raceline_hash == b.raceline_hash && a.cyclic == b.cyclic &&
         a.lap_length == b.lap_length && a.layer_s == b.layer_s && a.layer_begin == b.layer_begin &&
         a.nodes == b.nodes && a.edges == b.edges && a.out_begin == b.out_begin;
}

std::vector<double> place_layers(const ReferenceLine& line, const GraphParams& params) {
  const double lap = line.lap_length();
  const double straight = params.long_sep_straight;
  const double curve = params.long_sep_curve;
  if (!(lap > straight)) throw GeometryError("lap shorter than the straight layer separation");

  std::vector<double> out{0.0};
  double s = 0.0;
  bool prev_curve = false;
  double step = straight;
  while (true) {
    // a layer is "in a curve" if curvature shows up before the next straight-spaced
    // layer would be placed; one extra dense layer follows every curve
    const bool in_curve = max_abs_curvature(line, s, straight) >= params.kappa_curve_thresh;
    step = (in_curve || prev_curve) ? curve : straight;
    prev_curve = in_curve;
    if (lap - (s + step) < curve) break;
    s += step;
    out.push_back(s);
  }
  const double rest = lap - s;
  if (rest > step + 1e-9 && rest / 2.0 >= curve) out.push_back(s + rest / 2.0);
  return out;
}

std::vector<LatticeNode> sample_layer(const ReferenceLine& line, double s_layer, const GraphParams& params,
                                      int layer_idx) {
  const auto rp = line.interpolate(s_layer);
  const double half = 0.5 * params.veh_width;
  const double reach_left = rp.w_left - half;
  const double reach_right = rp.w_right - half;
  if (reach_left < 0.0 || reach_right < 0.0) {
    throw GeometryError("track narrower than vehicle at s=" + std::to_string(rp.s));
  }
  const int k_min = -static_cast<int>(std::floor(reach_right / params.lat_sep + 1e-9));
  const int k_max = static_cast<int>(std::floor(reach_left / params.lat_sep + 1e-9));
  const double th_left = line.bound_heading(rp.s, Side::kLeft);
  const double th_right = line.bound_heading(rp.s, Side::kRight);

  std::vector<LatticeNode> out;
  out.reserve(static_cast<std::size_t>(k_max - k_min + 1));
  for (int k = k_min; k <= k_max; ++k) {
    LatticeNode n;
    n.layer = layer_idx;
    n.lat_idx = k;
    n.s = rp.s;
    n.l = k * params.lat_sep;
    const Vec2 p = Vec2(rp.x, rp.y) + left_normal(rp.theta) * n.l;
    double theta = rp.theta;
    if (k > 0) {
      theta = normalize_angle(rp.theta + std::min(1.0, n.l / reach_left) * angle_diff(th_left, rp.theta));
    } else if (k < 0) {
      theta = normalize_angle(rp.theta + std::min(1.0, -n.l / reach_right) * angle_diff(th_right, rp.theta));
    }
    n.pose = {p.x(), p.y(), theta};
    out.push_back(n);
  }
  return out;
}

double edge_cost(double s_len, double kappa_avg, double kappa_range, double d_lat_end, const GraphParams& p) {
  return s_len * (p.w_len + p.w_kappa_avg * kappa_avg * kappa_avg + p.w_kappa_range * kappa_range * kappa_range +
                  p.w_rl * std::abs(d_lat_end));
}

bool make_edge(const LatticeNode& from, const LatticeNode& to, int from_idx, int to_idx, const GraphParams& params,
               LatticeEdge& out) {
  out.from = from_idx;
  out.to = to_idx;
  out.segment = fit_c1_segment(from.pose, to.pose);
  const int intervals = std::max(2, static_cast<int>(std::ceil(out.segment.s_len / params.sample_spacing)));
  out.sampled = sample_segment(out.segment, intervals + 1);
  const auto& k = out.sampled.kappa;
  if (k.abs().maxCoeff() > 1.0 / params.r_min) return false;

  out.s_len = out.segment.s_len;
  out.kappa_avg = k.abs().mean();
  out.kappa_range = k.maxCoeff() - k.minCoeff();
  out.cost = edge_cost(out.s_len, out.kappa_avg, out.kappa_range, to.d_lat(), params);

  const Vec2 lo(out.sampled.x.minCoeff(), out.sampled.y.minCoeff());
  const Vec2 hi(out.sampled.x.maxCoeff(), out.sampled.y.maxCoeff());
  out.bound_center = 0.5 * (lo + hi);
  out.bound_radius = ((out.sampled.x - out.bound_center.x()).square() + (out.sampled.y - out.bound_center.y()).square())
                         .sqrt()
                         .maxCoeff();
  return true;
}

std::vector<LatticeEdge> build_edges(const Lattice& g) {
  std::vector<LatticeEdge> edges;
  const int layers = g.num_layers();
  if (layers < 2) throw GeometryError("need at least two layers");
  const int last = g.cyclic ? layers : layers - 1;
  LatticeEdge e;
  for (int layer = 0; layer < last; ++layer) {
    const int next = g.next_layer(layer);
    const double gap = g.layer_gap(layer);
    for (int i = g.layer_begin[layer]; i < g.layer_begin[layer + 1]; ++i) {
      for (int j = g.layer_begin[next]; j < g.layer_begin[next + 1]; ++j) {
        const auto& a = g.nodes[i];
        const auto& b = g.nodes[j];
        if (std::abs(b.l - a.l) / gap > g.params.lat_ratio_max + 1e-12) continue;
        if (make_edge(a, b, i, j, g.params, e)) edges.push_back(e);
      }
    }
  }
  return edges;
}

Lattice prune(Lattice g) {
  const int n = static_cast<int>(g.nodes.size());
  const int layers = g.num_layers();
  std::vector<std::vector<int>> in(n), out(n);
  for (int k = 0; k < static_cast<int>(g.edges.size()); ++k) {
    out[g.edges[k].from].push_back(k);
    in[g.edges[k].to].push_back(k);
  }
  std::vector<int> indeg(n), outdeg(n);
  std::vector<char> node_alive(n, 1), edge_alive(g.edges.size(), 1);
  std::deque<int> queue;
  auto exempt_in = [&](int v) { return !g.cyclic && g.nodes[v].layer == 0; };
  auto exempt_out = [&](int v) { return !g.cyclic && g.nodes[v].layer == layers - 1; };
  for (int v = 0; v < n; ++v) {
    indeg[v] = static_cast<int>(in[v].size());
    outdeg[v] = static_cast<int>(out[v].size());
    if ((indeg[v] == 0 && !exempt_in(v)) || (outdeg[v] == 0 && !exempt_out(v))) queue.push_back(v);
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (!node_alive[v]) continue;
    node_alive[v] = 0;
    for (int k : out[v]) {
      if (!edge_alive[k]) continue;
      edge_alive[k] = 0;
      const int w = g.edges[k].to;
      if (--indeg[w] == 0 && node_alive[w] && !exempt_in(w)) queue.push_back(w);
    }
    for (int k : in[v]) {
      if (!edge_alive[k]) continue;
      edge_alive[k] = 0;
      const int u = g.edges[k].from;
      if (--outdeg[u] == 0 && node_alive[u] && !exempt_out(u)) queue.push_back(u);
    }
  }

  std::vector<int> remap(n, -1);
  std::vector<LatticeNode> nodes;
  for (int v = 0; v < n; ++v) {
    if (!node_alive[v]) continue;
    remap[v] = static_cast<int>(nodes.size());
    nodes.push_back(g.nodes[v]);
  }
  if (nodes.empty()) throw UntraversableError();
  std::vector<LatticeEdge> edges;
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    if (!edge_alive[k]) continue;
    auto e = std::move(g.edges[k]);
    e.from = remap[e.from];
    e.to = remap[e.to];
    edges.push_back(std::move(e));
  }
  g.nodes = std::move(nodes);
  g.edges = std::move(edges);
  g.reindex();
  for (int layer = 0; layer < layers; ++layer) {
    if (g.layer_begin[layer] == g.layer_begin[layer + 1]) throw UntraversableError();
  }
  return g;
}

Lattice build_lattice(const ReferenceLine& line, const GraphParams& params, std::uint64_t raceline_hash) {
  validate(params);
  Lattice g;
  g.params = params;
  g.raceline_hash = raceline_hash;
  g.ref = line;
  g.cyclic = true;
  g.lap_length = line.lap_length();
  g.layer_s = place_layers(line, params);
  for (int layer = 0; layer < g.num_layers(); ++layer) {
    auto layer_nodes = sample_layer(line, g.layer_s[layer], params, layer);
    g.nodes.insert(g.nodes.end(), layer_nodes.begin(), layer_nodes.end());
  }
  g.reindex();
  g.edges = build_edges(g);
  g.reindex();
  return prune(std::move(g));
}

}  // namespace raceplan
