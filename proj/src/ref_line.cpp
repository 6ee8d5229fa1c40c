#include "raceplan/ref_line.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "raceplan/csv.hpp"
#include "raceplan/errors.hpp"

namespace raceplan {
namespace {

constexpr double kClosureGap = 1.0;  // max start/end gap of a closed line [m]

double lerp(double a, double b, double t) { return a + (b - a) * t; }

double lerp_angle(double a, double b, double t) { return normalize_angle(a + angle_diff(b, a) * t); }

std::vector<double> central_difference_headings(const std::vector<Vec2>& pts) {
  const std::size_t n = pts.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 d = pts[(i + 1) % n] - pts[(i + n - 1) % n];
    out[i] = std::atan2(d.y(), d.x());
  }
  return out;
}

}  // namespace

ReferenceLine ReferenceLine::from_points(std::vector<RefLinePoint> pts, Columns given) {
  if (pts.size() >= 2) {
    const Vec2 first(pts.front().x, pts.front().y);
    const Vec2 last(pts.back().x, pts.back().y);
    if ((first - last).norm() < 1e-6) pts.pop_back();  // explicit closing duplicate
  }
  if (pts.size() < 4) throw GeometryError("reference line needs at least 4 distinct points");

  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(pts[i].w_left > 0.0) || !(pts[i].w_right > 0.0)) {
      throw GeometryError("track widths must be positive (point " + std::to_string(i) + ")");
    }
  }
  const double gap = std::hypot(pts.front().x - pts.back().x, pts.front().y - pts.back().y);
  if (gap > kClosureGap) {
    throw GeometryError("reference line is not closed: start/end gap " + std::to_string(gap) + " m");
  }

  if (given.station) {
    const double s0 = pts.front().s;
    for (auto& p : pts) p.s -= s0;
    for (std::size_t i = 1; i < n; ++i) {
      if (!(pts[i].s > pts[i - 1].s)) {
        throw GeometryError("stations must be strictly increasing (point " + std::to_string(i) + ")");
      }
    }
  } else {
    pts.front().s = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double d = std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
      if (d <= 0.0) throw GeometryError("duplicate consecutive points at " + std::to_string(i));
      pts[i].s = pts[i - 1].s + d;
    }
  }
  if (gap <= 0.0) throw GeometryError("closing segment has zero length");

  ReferenceLine line;
  line.lap_length_ = pts.back().s + gap;

  std::vector<Vec2> xy(n);
  for (std::size_t i = 0; i < n; ++i) xy[i] = {pts[i].x, pts[i].y};

  if (given.heading) {
    for (auto& p : pts) p.theta = normalize_angle(p.theta);
  } else {
    const auto th = central_difference_headings(xy);
    for (std::size_t i = 0; i < n; ++i) pts[i].theta = th[i];
  }
  if (!given.curvature) {
    std::vector<double> kappa(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t prev = (i + n - 1) % n;
      const std::size_t next = (i + 1) % n;
      const double ds_prev = i == 0 ? gap : pts[i].s - pts[prev].s;
      const double ds_next = next == 0 ? gap : pts[next].s - pts[i].s;
      kappa[i] = angle_diff(pts[next].theta, pts[prev].theta) / (ds_prev + ds_next);
    }
    for (std::size_t i = 0; i < n; ++i) pts[i].kappa = kappa[i];
  }

  std::vector<Vec2> left(n), right(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 nrm = left_normal(pts[i].theta);
    left[i] = xy[i] + nrm * pts[i].w_left;
    right[i] = xy[i] - nrm * pts[i].w_right;
  }
  line.left_bound_heading_ = central_difference_headings(left);
  line.right_bound_heading_ = central_difference_headings(right);
  line.points_ = std::move(pts);
  return line;
}

double ReferenceLine::wrap(double s) const {
  double w = std::fmod(s, lap_length_);
  if (w < 0.0) w += lap_length_;
  if (w >= lap_length_) w = 0.0;  // -tiny % L rounds up to L
  return w;
}

std::size_t ReferenceLine::segment_index(double s) const {
  const double w = wrap(s);
  const auto it = std::upper_bound(points_.begin(), points_.end(), w,
                                   [](double v, const RefLinePoint& p) { return v < p.s; });
  return static_cast<std::size_t>(std::distance(points_.begin(), it)) - 1;
}

RefLinePoint ReferenceLine::interpolate(double s) const {
  const double w = wrap(s);
  const std::size_t i = segment_index(w);
  const auto& a = points_[i];
  const auto& b = points_[(i + 1) % points_.size()];
  const double t = (w - a.s) / (segment_end(i) - a.s);
  RefLinePoint out;
  out.s = w;
  out.x = lerp(a.x, b.x, t);
  out.y = lerp(a.y, b.y, t);
  out.theta = lerp_angle(a.theta, b.theta, t);
  out.kappa = lerp(a.kappa, b.kappa, t);
  out.v_ref = lerp(a.v_ref, b.v_ref, t);
  out.w_left = lerp(a.w_left, b.w_left, t);
  out.w_right = lerp(a.w_right, b.w_right, t);
  return out;
}

Vec2 ReferenceLine::position(double s) const {
  const auto p = interpolate(s);
  return {p.x, p.y};
}

double ReferenceLine::heading(double s) const { return interpolate(s).theta; }

double ReferenceLine::curvature(double s) const { return interpolate(s).kappa; }

double ReferenceLine::bound_heading(double s, Side side) const {
  const double w = wrap(s);
  const std::size_t i = segment_index(w);
  const std::size_t j = (i + 1) % points_.size();
  const double t = (w - points_[i].s) / (segment_end(i) - points_[i].s);
  const auto& h = side == Side::kLeft ? left_bound_heading_ : right_bound_heading_;
  return lerp_angle(h[i], h[j], t);
}

Vec2 ReferenceLine::to_cartesian(double s, double l) const {
  const auto p = interpolate(s);
  return Vec2(p.x, p.y) + left_normal(p.theta) * l;
}

// On segment i the reference point moves along the chord while the frame rotates
// with the interpolated heading. The foot point satisfies g(s) = (p - r(s)) . t(s) = 0;
// g is continuous, so a sign change brackets a root which bisection isolates.
bool ReferenceLine::solve_on_segment(std::size_t i, const Vec2& p, Candidate& out) const {
  const auto& a = points_[i];
  const auto& b = points_[(i + 1) % points_.size()];
  const double s0 = a.s;
  const double s1 = segment_end(i);
  const Vec2 ra(a.x, a.y);
  const Vec2 rb(b.x, b.y);
  const double dth = angle_diff(b.theta, a.theta);

  auto g = [&](double t) {
    const Vec2 r = ra + (rb - ra) * t;
    return (p - r).dot(heading_vector(a.theta + dth * t));
  };
  double lo = 0.0, hi = 1.0;
  double glo = g(lo), ghi = g(hi);
  if (glo < 0.0 || ghi > 0.0) return false;  // g decreases through a foot point
  for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm >= 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  const double t = (glo - ghi) != 0.0 ? lo + (hi - lo) * glo / (glo - ghi) : lo;
  const Vec2 r = ra + (rb - ra) * t;
  out.s = s0 + (s1 - s0) * t;
  out.l = (p - r).dot(left_normal(a.theta + dth * t));
  return true;
}

FrenetPoint ReferenceLine::pick(const std::vector<Candidate>& c) const {
  const Candidate* best = &c.front();
  for (const auto& k : c) {
    const double ak = std::abs(k.l), ab = std::abs(best->l);
    if (ak < ab - 1e-12 || (std::abs(ak - ab) <= 1e-12 && wrap(k.s) < wrap(best->s))) best = &k;
  }
  return {wrap(best->s), best->l};
}

FrenetPoint ReferenceLine::nearest_chord_projection(const Vec2& p) const {
  const std::size_t n = points_.size();
  double best_d = std::numeric_limits<double>::infinity();
  FrenetPoint best;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a(points_[i].x, points_[i].y);
    const Vec2 b(points_[(i + 1) % n].x, points_[(i + 1) % n].y);
    const Vec2 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const Vec2 foot = a + ab * t;
    const double d = (p - foot).squaredNorm();
    if (d < best_d) {
      best_d = d;
      const double s = points_[i].s + (segment_end(i) - points_[i].s) * t;
      best = {wrap(s), (p - foot).dot(left_normal(lerp_angle(points_[i].theta, points_[(i + 1) % n].theta, t)))};
    }
  }
  return best;
}

FrenetPoint ReferenceLine::to_frenet(const Vec2& p) const {
  const std::size_t n = points_.size();
  // coarse pass over every stride-th point, then a fine pass around the best one
  const std::size_t stride = std::max<std::size_t>(1, n / 64);
  std::size_t coarse = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; i += stride) {
    const double d = (p - Vec2(points_[i].x, points_[i].y)).squaredNorm();
    if (d < best) {
      best = d;
      coarse = i;
    }
  }
  std::size_t nearest = coarse;
  for (std::size_t k = 0; k <= 2 * stride; ++k) {
    const std::size_t i = (coarse + n - stride + k) % n;
    const double d = (p - Vec2(points_[i].x, points_[i].y)).squaredNorm();
    if (d < best) {
      best = d;
      nearest = i;
    }
  }

  std::vector<Candidate> cands;
  Candidate c{};
  for (std::size_t k = 0; k < 4; ++k) {
    const std::size_t i = (nearest + n - 2 + k) % n;
    if (solve_on_segment(i, p, c)) cands.push_back(c);
  }
  if (!cands.empty()) {
    const auto f = pick(cands);
    // the foot point may sit slightly off the chord, hence the small slack
    if (std::abs(f.l) <= 1.05 * std::sqrt(best) + 1e-3) return f;
  }
  return to_frenet_exhaustive(p);
}

FrenetPoint ReferenceLine::to_frenet_exhaustive(const Vec2& p) const {
  std::vector<Candidate> cands;
  Candidate c{};
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (solve_on_segment(i, p, c)) cands.push_back(c);
  }
  if (cands.empty()) return nearest_chord_projection(p);
  return pick(cands);
}

ReferenceLine parse_reference_line(std::string_view text, const std::string& source_name) {
  const auto table = csv::parse(text, source_name);
  const auto c_s = table.column("s_m");
  const auto c_psi = table.column("psi_rad");
  const auto c_kappa = table.column("kappa_radpm");
  const auto c_x = table.require_column("x_m");
  const auto c_y = table.require_column("y_m");
  const auto c_v = table.require_column("vx_mps");
  const auto c_wl = table.require_column("w_left_m");
  const auto c_wr = table.require_column("w_right_m");

  std::vector<RefLinePoint> pts;
  pts.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    RefLinePoint p;
    if (c_s) p.s = table.number(row, *c_s);
    p.x = table.number(row, c_x);
    p.y = table.number(row, c_y);
    if (c_psi) p.theta = table.number(row, *c_psi);
    if (c_kappa) p.kappa = table.number(row, *c_kappa);
    p.v_ref = table.number(row, c_v);
    p.w_left = table.number(row, c_wl);
    p.w_right = table.number(row, c_wr);
    if (!(p.w_left > 0.0) || !(p.w_right > 0.0)) {
      throw ParseError(source_name, row.line, "track widths must be positive");
    }
    if (p.v_ref < 0.0) throw ParseError(source_name, row.line, "negative reference velocity");
    pts.push_back(p);
  }
  if (pts.size() < 4) throw GeometryError(source_name + ": reference line needs at least 4 rows");
  try {
    return ReferenceLine::from_points(std::move(pts), {c_s.has_value(), c_psi.has_value(), c_kappa.has_value()});
  } catch (const GeometryError& e) {
    throw GeometryError(source_name + ": " + e.what());
  }
}

ReferenceLine load_reference_line(const std::filesystem::path& path) {
  return parse_reference_line(csv::read_file(path), path.string());
}

std::string format_reference_line(const ReferenceLine& line) {
  std::ostringstream out;
  out << "s_m,x_m,y_m,psi_rad,kappa_radpm,vx_mps,w_left_m,w_right_m\n";
  for (const auto& p : line.points()) {
    out << csv::format_double(p.s) << ',' << csv::format_double(p.x) << ',' << csv::format_double(p.y) << ','
        << csv::format_double(p.theta) << ',' << csv::format_double(p.kappa) << ',' << csv::format_double(p.v_ref)
        << ',' << csv::format_double(p.w_left) << ',' << csv::format_double(p.w_right) << '\n';
  }
  return out.str();
}

double wrap_station(const ReferenceLine& line, double s) { return line.wrap(s); }

Vec2 frenet_to_cartesian(const ReferenceLine& line, double s, double l) { return line.to_cartesian(s, l); }

FrenetPoint cartesian_to_frenet(const ReferenceLine& line, const Vec2& p) { return line.to_frenet(p); }

double station_delta(const ReferenceLine& line, double to, double from) {
  const double lap = line.lap_length();
  double d = line.wrap(to - from);
  if (d >= 0.5 * lap) d -= lap;
  return d;
}

ReferenceLine rebase_bounds(const ReferenceLine& race_line, const ReferenceLine& track) {
  auto pts = race_line.points();
  for (auto& p : pts) {
    const auto f = track.to_frenet({p.x, p.y});
    const auto c = track.interpolate(f.s);
    p.w_left = c.w_left - f.l;
    p.w_right = c.w_right + f.l;
    if (!(p.w_left > 0.0) || !(p.w_right > 0.0)) {
      throw GeometryError("race line leaves the track near station " + std::to_string(p.s));
    }
  }
  return ReferenceLine::from_points(std::move(pts), {true, true, true});
}

}  // namespace raceplan
