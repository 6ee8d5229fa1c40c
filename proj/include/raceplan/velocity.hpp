#pragma once

#include <algorithm>
#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "raceplan/spline.hpp"

namespace raceplan {

struct FrictionParams {
  double a_lat_max = 12.0;     // [m/s^2]
  double a_lon_max_acc = 6.0;  // [m/s^2]
  double a_lon_max_dec = 12.0;  // braking, positive [m/s^2]
  double v_cap = 60.0;         // [m/s]
};

/// Piecewise-linear friction scale over the lap station; 1.0 when empty.
class FrictionMap {
 public:
  FrictionMap() = default;
  FrictionMap(std::vector<double> s, std::vector<double> scale, double lap_length);

  /// CSV with header `s_m,scale`; scales must lie in (0, 1].
  static FrictionMap parse(std::string_view text, double lap_length, const std::string& source = "<memory>");
  static FrictionMap load(const std::filesystem::path& path, double lap_length);

  double at(double station) const;
  bool empty() const { return s_.empty(); }

 private:
  std::vector<double> s_;
  std::vector<double> scale_;
  double lap_ = 0.0;
};

struct VelocityProfile {
  Eigen::ArrayXd v;  // [m/s] per path sample
  Eigen::ArrayXd a;  // [m/s^2] from sample k to k+1; last entry repeats the previous
  bool infeasible_entry = false;
};

/// PD follow law parameters. The safe gap is bumper to bumper.
struct FollowParams {
  double d_min = 5.0;   // [m]
  double t_gap = 0.8;   // [s]
  double kp = 0.5;      // [1/s]
  double kd = 0.3;
  double d_safe(double v_ego) const { return std::max(d_min, t_gap * v_ego); }
};

double curvature_speed_limit(double kappa, const FrictionParams& p, double scale = 1.0);

/// Lateral acceleration available at a sample, a_lat_max * scale.
inline double lateral_limit(const FrictionParams& p, double scale) { return p.a_lat_max * scale; }

/// Velocity maximizing the combined (elliptic) acceleration use on the given
/// samples. `scale` holds per-sample friction scales (empty means 1). The
/// first sample equals v_start; the last is at most v_goal unless the entry
/// speed cannot be braked down in time (infeasible_entry).
VelocityProfile forward_backward_profile(const SampledPath& path, double v_start, double v_goal,
                                         const FrictionParams& p, const Eigen::ArrayXd& scale = {});

/// Same as forward_backward_profile with extra per-sample speed caps.
VelocityProfile forward_backward_profile(const SampledPath& path, double v_start, double v_goal,
                                         const FrictionParams& p, const Eigen::ArrayXd& scale,
                                         const Eigen::ArrayXd& extra_cap);

/// Target end speed of the follow law, clamp(v_lead + kp (gap - d_safe) + kd gap_rate, 0, v_cap).
double follow_target_speed(double gap, double gap_rate, double v_lead, double v_ego, const FrictionParams& p,
                           const FollowParams& f);

/// Profile for driving behind a lead vehicle: the follow target is enforced from
/// the point where the current gap would shrink to the safe distance, and the
/// result never exceeds the plain friction-limited profile.
VelocityProfile follow_profile(const SampledPath& path, double gap, double gap_rate, double v_lead, double v_start,
                               double v_goal, const FrictionParams& p, const FollowParams& f,
                               const Eigen::ArrayXd& scale = {});

/// Accelerations from consecutive velocities, a = (v1^2 - v0^2) / (2 ds).
Eigen::ArrayXd accelerations(const SampledPath& path, const Eigen::ArrayXd& v);

}  // namespace raceplan
