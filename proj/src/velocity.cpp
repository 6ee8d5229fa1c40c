#include "raceplan/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "raceplan/csv.hpp"
#include "raceplan/errors.hpp"

namespace raceplan {

FrictionMap::FrictionMap(std::vector<double> s, std::vector<double> scale, double lap_length)
    : s_(std::move(s)), scale_(std::move(scale)), lap_(lap_length) {
  if (s_.size() != scale_.size()) throw InputError("friction map: size mismatch");
  for (std::size_t i = 0; i < s_.size(); ++i) {
    if (!(scale_[i] > 0.0 && scale_[i] <= 1.0)) throw InputError("friction map: scale must lie in (0, 1]");
    if (i > 0 && !(s_[i] > s_[i - 1])) throw InputError("friction map: stations must increase");
  }
  if (!s_.empty() && (s_.front() < 0.0 || s_.back() >= lap_)) throw InputError("friction map: station outside lap");
}

FrictionMap FrictionMap::parse(std::string_view text, double lap_length, const std::string& source) {
  const auto t = csv::parse(text, source);
  const auto cs = t.require_column("s_m");
  const auto cv = t.require_column("scale");
  std::vector<double> s, v;
  for (const auto& row : t.rows) {
    s.push_back(t.number(row, cs));
    v.push_back(t.number(row, cv));
  }
  return FrictionMap(std::move(s), std::move(v), lap_length);
}

FrictionMap FrictionMap::load(const std::filesystem::path& path, double lap_length) {
  return parse(csv::read_file(path), lap_length, path.string());
}

double FrictionMap::at(double station) const {
  if (s_.empty()) return 1.0;
  if (s_.size() == 1) return scale_.front();
  double w = std::fmod(station, lap_);
  if (w < 0.0) w += lap_;
  const auto it = std::upper_bound(s_.begin(), s_.end(), w);
  if (it == s_.begin() || it == s_.end()) {
    // wrap-around interval between the last and the first entry
    const double s0 = s_.back();
    const double s1 = s_.front() + lap_;
    const double x = w < s_.front() ? w + lap_ : w;
    return scale_.back() + (scale_.front() - scale_.back()) * (x - s0) / (s1 - s0);
  }
  const auto i = static_cast<std::size_t>(std::distance(s_.begin(), it)) - 1;
  return scale_[i] + (scale_[i + 1] - scale_[i]) * (w - s_[i]) / (s_[i + 1] - s_[i]);
}

double curvature_speed_limit(double kappa, const FrictionParams& p, double scale) {
  const double k = std::abs(kappa);
  if (k <= 0.0) return p.v_cap;
  return std::min(p.v_cap, std::sqrt(lateral_limit(p, scale) / k));
}

Eigen::ArrayXd accelerations(const SampledPath& path, const Eigen::ArrayXd& v) {
  const Eigen::Index n = v.size();
  Eigen::ArrayXd a = Eigen::ArrayXd::Zero(n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double ds = path.s[k + 1] - path.s[k];
    a[k] = (v[k + 1] * v[k + 1] - v[k] * v[k]) / (2.0 * ds);
  }
  return a;
}

VelocityProfile forward_backward_profile(const SampledPath& path, double v_start, double v_goal,
                                         const FrictionParams& p, const Eigen::ArrayXd& scale) {
  return forward_backward_profile(path, v_start, v_goal, p, scale, Eigen::ArrayXd());
}

VelocityProfile forward_backward_profile(const SampledPath& path, double v_start, double v_goal,
                                         const FrictionParams& p, const Eigen::ArrayXd& scale,
                                         const Eigen::ArrayXd& extra_cap) {
  const Eigen::Index n = path.size();
  if (n < 2) throw InputError("velocity profile needs at least two samples");
  if (v_start < 0.0 || v_goal < 0.0) throw InputError("velocity profile: negative boundary speed");

  auto scale_at = [&](Eigen::Index k) { return scale.size() == n ? scale[k] : 1.0; };
  Eigen::ArrayXd lim(n), a_lat(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    a_lat[k] = lateral_limit(p, scale_at(k));
    lim[k] = curvature_speed_limit(path.kappa[k], p, scale_at(k));
    if (extra_cap.size() == n) lim[k] = std::min(lim[k], extra_cap[k]);
  }

  // Backward pass. Braking from k to k+1 uses the friction left over at sample k:
  //   w_k^2 - w_{k+1}^2 <= 2 ds a_dec sqrt(1 - (kappa_k w_k^2 / a_lat_k)^2)
  // which is solved for the largest w_k in closed form.
  Eigen::ArrayXd w(n);
  w[n - 1] = std::min(lim[n - 1], v_goal);
  for (Eigen::Index k = n - 2; k >= 0; --k) {
    const double c = w[k + 1] * w[k + 1];
    if (c >= lim[k] * lim[k]) {
      w[k] = lim[k];
      continue;
    }
    const double b = 2.0 * (path.s[k + 1] - path.s[k]) * p.a_lon_max_dec;
    const double r = b * path.kappa[k] / a_lat[k];
    const double q = r * r;
    const double disc = b * b * (1.0 + q) - q * c * c;
    const double u = (c + std::sqrt(std::max(0.0, disc))) / (1.0 + q);
    w[k] = std::min(lim[k], std::sqrt(u));
  }

  VelocityProfile out;
  out.v.resize(n);
  out.v[0] = v_start;
  out.infeasible_entry = v_start > w[0] * (1.0 + 1e-9) + 1e-9;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double vk = out.v[k];
    const double ds = path.s[k + 1] - path.s[k];
    const double use = path.kappa[k] * vk * vk / a_lat[k];
    const double spare = std::sqrt(std::max(0.0, 1.0 - use * use));
    const double up = std::sqrt(vk * vk + 2.0 * ds * p.a_lon_max_acc * spare);
    double next = std::min(w[k + 1], up);
    if (vk > w[k] * (1.0 + 1e-9) + 1e-9) {
      // above the braking envelope: brake as hard as possible until back inside
      const double down = std::sqrt(std::max(0.0, vk * vk - 2.0 * ds * p.a_lon_max_dec * spare));
      next = std::min(up, std::max(w[k + 1], down));
    }
    out.v[k + 1] = next;
  }
  out.a = accelerations(path, out.v);
  return out;
}

double follow_target_speed(double gap, double gap_rate, double v_lead, double v_ego, const FrictionParams& p,
                           const FollowParams& f) {
  const double v = v_lead + f.kp * (gap - f.d_safe(v_ego)) + f.kd * gap_rate;
  return std::clamp(v, 0.0, p.v_cap);
}

VelocityProfile follow_profile(const SampledPath& path, double gap, double gap_rate, double v_lead, double v_start,
                               double v_goal, const FrictionParams& p, const FollowParams& f,
                               const Eigen::ArrayXd& scale) {
  if (gap < 0.0) throw InputError("follow_profile: negative gap");
  const double v_target = follow_target_speed(gap, gap_rate, v_lead, v_start, p, f);
  const double reach = std::max(0.0, gap - f.d_safe(v_start));
  Eigen::ArrayXd cap = (path.s >= reach).select(Eigen::ArrayXd::Constant(path.size(), v_target),
                                                std::numeric_limits<double>::infinity());
  cap[0] = std::numeric_limits<double>::infinity();  // entry speed is given
  auto follow = forward_backward_profile(path, v_start, std::min(v_goal, v_target), p, scale, cap);
  const auto free = forward_backward_profile(path, v_start, v_goal, p, scale);
  follow.v = follow.v.min(free.v);
  follow.v[0] = v_start;
  follow.a = accelerations(path, follow.v);
  follow.infeasible_entry = follow.infeasible_entry || free.infeasible_entry;
  return follow;
}

}  // namespace raceplan
