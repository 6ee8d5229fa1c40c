#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "raceplan/ref_line.hpp"
#include "raceplan/spline.hpp"

namespace raceplan {

/// Offline graph parameters. Defaults: node/layer spacing and cost weights of
/// the reference configuration, plus vehicle-specific limits.
struct GraphParams {
  double lat_sep = 0.5;             // lateral node separation [m]
  double long_sep_straight = 30.0;  // layer separation on straights [m]
  double long_sep_curve = 6.0;      // layer separation in curves [m]
  double kappa_curve_thresh = 0.01;  // |kappa| marking a curve [1/m]
  double min_horizon = 200.0;       // [m]
  double w_len = 0.0;
  double w_kappa_avg = 7500.0;
  double w_kappa_range = 15000.0;
  double w_rl = 5.0;
  double lat_ratio_max = 0.2;  // max |dl| / layer gap of an edge
  double r_min = 5.0;          // vehicle turn radius [m]
  double veh_width = 1.9;      // [m]
  double sample_spacing = 1.5;  // max edge sample spacing [m]

  bool operator==(const GraphParams&) const = default;
};

/// Reads `key = value` lines (keys named like the fields above). Unknown keys are an error.
GraphParams parse_graph_params(std::string_view text, const std::string& source = "<memory>");
GraphParams load_graph_params(const std::filesystem::path& path);
void validate(const GraphParams& p);

struct LatticeNode {
  int layer = 0;
  int lat_idx = 0;  // l = lat_idx * lat_sep, left positive
  double s = 0.0;
  double l = 0.0;
  Pose pose;

  double d_lat() const { return l; }
  bool on_raceline() const { return lat_idx == 0; }
  bool operator==(const LatticeNode&) const = default;
};

struct LatticeEdge {
  int from = 0;
  int to = 0;
  CubicSegment segment;
  SampledPath sampled;
  double s_len = 0.0;
  double kappa_avg = 0.0;    // mean |kappa| over the samples
  double kappa_range = 0.0;  // max kappa - min kappa
  double cost = 0.0;
  Vec2 bound_center = Vec2::Zero();  // circle enclosing every sample
  double bound_radius = 0.0;

  bool operator==(const LatticeEdge&) const = default;
};

/// Layered directed graph over one lap. Nodes are stored layer by layer in
/// ascending lat_idx; edges are sorted by (from, to) so each node's children
/// form a contiguous range. Edges join layer i to layer i+1, and the last
/// layer to layer 0 when `cyclic`.
struct Lattice {
  GraphParams params;
  std::uint64_t raceline_hash = 0;
  ReferenceLine ref;
  bool cyclic = true;
  double lap_length = 0.0;

  std::vector<double> layer_s;
  std::vector<int> layer_begin;  // size num_layers()+1
  std::vector<LatticeNode> nodes;
  std::vector<LatticeEdge> edges;
  std::vector<int> out_begin;  // size nodes.size()+1

  int num_layers() const { return static_cast<int>(layer_s.size()); }
  int next_layer(int layer) const { return (layer + 1) % num_layers(); }
  /// Station distance from `layer` to the following layer.
  double layer_gap(int layer) const;

  std::span<const LatticeNode> layer_nodes(int layer) const {
    return {nodes.data() + layer_begin[layer], nodes.data() + layer_begin[layer + 1]};
  }
  std::span<const LatticeEdge> out_edges(int node) const {
    return {edges.data() + out_begin[node], edges.data() + out_begin[node + 1]};
  }
  int edge_index(const LatticeEdge& e) const { return static_cast<int>(&e - edges.data()); }

  /// Rebuilds layer_begin/out_begin after nodes or edges changed. Sorts edges.
  void reindex();
};

/// Structural equality: params, hash, layers, nodes and edges (costs and geometry bit-exact).
bool same_graph(const Lattice& a, const Lattice& b);

std::vector<double> place_layers(const ReferenceLine& line, const GraphParams& params);

std::vector<LatticeNode> sample_layer(const ReferenceLine& line, double s_layer, const GraphParams& params,
                                      int layer_idx = 0);

double edge_cost(double s_len, double kappa_avg, double kappa_range, double d_lat_end, const GraphParams& params);

/// Fits, samples and scores one edge. Returns false if curvature exceeds 1/r_min.
bool make_edge(const LatticeNode& from, const LatticeNode& to, int from_idx, int to_idx, const GraphParams& params,
               LatticeEdge& out);

/// Connects every admissible node pair of consecutive layers.
std::vector<LatticeEdge> build_edges(const Lattice& lattice);

/// Removes nodes without parents or children (and their edges) until nothing
/// changes. Throws UntraversableError when no node survives.
Lattice prune(Lattice lattice);

/// Layer placement, node sampling, edge generation and pruning.
Lattice build_lattice(const ReferenceLine& line, const GraphParams& params, std::uint64_t raceline_hash = 0);

}  // namespace raceplan
