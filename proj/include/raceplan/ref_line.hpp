#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "raceplan/geometry.hpp"

namespace raceplan {

struct RefLinePoint {
  double s = 0.0;      // station [m]
  double x = 0.0;      // [m]
  double y = 0.0;      // [m]
  double theta = 0.0;  // heading [rad]
  double kappa = 0.0;  // curvature [1/m]
  double v_ref = 0.0;  // race-line velocity [m/s]
  double w_left = 0.0;   // distance to left track bound [m]
  double w_right = 0.0;  // distance to right track bound [m]
};

struct FrenetPoint {
  double s = 0.0;
  double l = 0.0;  // left-positive lateral offset
};

enum class Side { kLeft, kRight };

/// Closed, discretized race line. The Frenet frame uses n = t rotated by +90 deg,
/// so positive lateral offsets are to the left of the driving direction.
///
/// Between two discrete points the position, widths, curvature and velocity are
/// interpolated linearly; the heading is interpolated along the shortest rotation.
/// Immutable after construction.
class ReferenceLine {
 public:
  struct Columns {
    bool station = true;
    bool heading = true;
    bool curvature = true;
  };

  ReferenceLine() = default;

  /// Takes ownership of `points`. Fields flagged absent in `given` are rebuilt:
  /// stations from cumulative chord length, headings and curvature from central
  /// finite differences on the closed loop. Throws GeometryError on invalid input.
  static ReferenceLine from_points(std::vector<RefLinePoint> points, Columns given);

  const std::vector<RefLinePoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double lap_length() const { return lap_length_; }
  bool closed() const { return true; }

  /// Station mapped into [0, lap_length).
  double wrap(double s) const;

  /// Index i of the segment [s_i, s_{i+1}) holding the wrapped station; the
  /// last index denotes the closing segment back to point 0.
  std::size_t segment_index(double s) const;

  /// Station at the end of segment i (lap_length for the closing segment).
  double segment_end(std::size_t i) const {
    return i + 1 < points_.size() ? points_[i + 1].s : lap_length_;
  }

  RefLinePoint interpolate(double s) const;

  Vec2 position(double s) const;
  double heading(double s) const;
  double curvature(double s) const;

  /// Heading of the left/right bound polyline, interpolated like heading().
  double bound_heading(double s, Side side) const;

  Vec2 to_cartesian(double s, double l) const;
  FrenetPoint to_frenet(const Vec2& p) const;

  /// Exhaustive variant of to_frenet: scans every segment. Slow; used as a cross-check.
  FrenetPoint to_frenet_exhaustive(const Vec2& p) const;

 private:
  struct Candidate {
    double s;
    double l;
  };
  bool solve_on_segment(std::size_t i, const Vec2& p, Candidate& out) const;
  FrenetPoint pick(const std::vector<Candidate>& c) const;
  FrenetPoint nearest_chord_projection(const Vec2& p) const;

  std::vector<RefLinePoint> points_;
  std::vector<double> left_bound_heading_;
  std::vector<double> right_bound_heading_;
  double lap_length_ = 0.0;
};

/// Parses the reference-line CSV format:
///   s_m,x_m,y_m,psi_rad,kappa_radpm,vx_mps,w_left_m,w_right_m
/// with s_m, psi_rad and kappa_radpm optional. `#` lines are comments.
ReferenceLine parse_reference_line(std::string_view text, const std::string& source_name = "<memory>");
ReferenceLine load_reference_line(const std::filesystem::path& path);

/// Writes a line in the CSV format above with all columns present.
std::string format_reference_line(const ReferenceLine& line);

double wrap_station(const ReferenceLine& line, double s);
Vec2 frenet_to_cartesian(const ReferenceLine& line, double s, double l);
FrenetPoint cartesian_to_frenet(const ReferenceLine& line, const Vec2& p);

/// Signed station difference to - from, mapped into [-lap/2, lap/2).
double station_delta(const ReferenceLine& line, double to, double from);

/// Replaces the bound widths of `race_line` with the widths implied by a
/// separate track centerline (same CSV format).
ReferenceLine rebase_bounds(const ReferenceLine& race_line, const ReferenceLine& track);

}  // namespace raceplan
