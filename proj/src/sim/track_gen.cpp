#include "raceplan/sim/track_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "raceplan/errors.hpp"

namespace raceplan::sim {

namespace {

struct TurnPoint {
  double x, y, theta, kappa;
};

// Left turn through pi starting at the origin, heading 0: clothoid entry,
// arc of radius r, clothoid exit. Positions by midpoint integration of the
// exact heading.
class Turn {
 public:
  Turn(double r, double lt) : r_(r), lt_(lt), len_(lt + std::numbers::pi * r) {}

  double length() const { return len_; }

  double kappa(double u) const {
    if (u < lt_) return u / (lt_ * r_);
    if (u > len_ - lt_) return (len_ - u) / (lt_ * r_);
    return 1.0 / r_;
  }
  double theta(double u) const {
    if (u < lt_) return u * u / (2.0 * lt_ * r_);
    if (u > len_ - lt_) {
      const double w = len_ - u;
      return std::numbers::pi - w * w / (2.0 * lt_ * r_);
    }
    return lt_ / (2.0 * r_) + (u - lt_) / r_;
  }

  std::vector<TurnPoint> sample(const std::vector<double>& us, double step) const {
    std::vector<TurnPoint> out;
    out.reserve(us.size());
    double x = 0.0, y = 0.0, u = 0.0;
    for (const double target : us) {
      while (u < target) {
        const double h = std::min(step, target - u);
        const double th = theta(u + 0.5 * h);
        x += h * std::cos(th);
        y += h * std::sin(th);
        u += h;
      }
      out.push_back({x, y, theta(target), kappa(target)});
    }
    return out;
  }

 private:
  double r_, lt_, len_;
};

}  // namespace

ReferenceLine make_airfield(const AirfieldParams& p) {
  if (!(p.straight > 0.0 && p.radius > 0.0 && p.spacing > 0.0 && p.half_width > 0.0 && p.half_width_curve > 0.0)) {
    throw InputError("airfield: dimensions must be positive");
  }
  if (p.transition < 0.0 || p.transition > 0.5 * std::numbers::pi * p.radius) {
    throw InputError("airfield: transition must lie in [0, pi r / 2]");
  }
  const Turn turn(p.radius, p.transition);
  const double lap = 2.0 * (p.straight + turn.length());
  const int n = static_cast<int>(std::ceil(lap / p.spacing));

  // distance along the straight to the nearest turn, 0 inside a turn
  auto half_width = [&](double d_turn) {
    if (d_turn <= 0.0 || p.taper <= 0.0) return d_turn <= 0.0 ? p.half_width_curve : p.half_width;
    const double f = std::min(1.0, d_turn / p.taper);
    return p.half_width_curve + f * (p.half_width - p.half_width_curve);
  };

  // both turns are the same up to a rotation by pi
  std::vector<double> turn_u;
  for (int i = 0; i < n; ++i) {
    const double s = lap * i / n;
    const double u = s < p.straight + turn.length() ? s - p.straight : s - 2.0 * p.straight - turn.length();
    if (u >= 0.0) turn_u.push_back(u);
  }
  std::sort(turn_u.begin(), turn_u.end());
  const auto turn_pts = turn.sample(turn_u, 0.01);
  auto turn_at = [&](double u) {
    const auto it = std::lower_bound(turn_u.begin(), turn_u.end(), u);
    return turn_pts[static_cast<std::size_t>(it - turn_u.begin())];
  };
  const auto turn_end = turn.sample({turn.length()}, 0.01).front();
  const Vec2 shift(turn_end.x, turn_end.y);

  std::vector<RefLinePoint> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = lap * i / n;
    auto& q = pts[static_cast<std::size_t>(i)];
    q.s = s;
    double d_turn = 0.0;
    if (s < p.straight) {
      q.x = s;
      q.y = 0.0;
      q.theta = 0.0;
      d_turn = std::min(s, p.straight - s);
    } else if (s < p.straight + turn.length()) {
      const auto t = turn_at(s - p.straight);
      q.x = p.straight + t.x;
      q.y = t.y;
      q.theta = normalize_angle(t.theta);
      q.kappa = t.kappa;
    } else if (s < 2.0 * p.straight + turn.length()) {
      const double u = s - p.straight - turn.length();
      q.x = p.straight + shift.x() - u;
      q.y = shift.y();
      q.theta = std::numbers::pi;
      d_turn = std::min(u, p.straight - u);
    } else {
      const auto t = turn_at(s - 2.0 * p.straight - turn.length());
      q.x = shift.x() - t.x;
      q.y = shift.y() - t.y;
      q.theta = normalize_angle(std::numbers::pi + t.theta);
      q.kappa = t.kappa;
    }
    q.w_left = q.w_right = half_width(d_turn);
  }

  auto line = ReferenceLine::from_points(pts, {true, true, true});
  const auto v = lap_speed_profile(line, p.friction);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].v_ref = v[i];
  return ReferenceLine::from_points(std::move(pts), {true, true, true});
}

std::vector<double> lap_speed_profile(const ReferenceLine& line, const FrictionParams& p) {
  const auto& pts = line.points();
  const auto n = static_cast<Eigen::Index>(pts.size());
  SampledPath path;
  path.resize(3 * n + 1);
  for (Eigen::Index k = 0; k <= 3 * n; ++k) {
    const auto& q = pts[static_cast<std::size_t>(k % n)];
    path.s[k] = q.s + line.lap_length() * static_cast<double>(k / n);
    path.x[k] = q.x;
    path.y[k] = q.y;
    path.psi[k] = q.theta;
    path.kappa[k] = q.kappa;
  }
  const auto prof = forward_backward_profile(path, 0.0, p.v_cap, p);
  std::vector<double> out(pts.size());
  for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = prof.v[n + k];
  return out;
}

}  // namespace raceplan::sim
