#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace raceplan {

using Vec2 = Eigen::Vector2d;

template <typename Scalar>
Scalar normalize_angle(Scalar a) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  a = std::remainder(a, Scalar(2) * pi);
  // remainder() maps to [-pi, pi]; keep +pi as the canonical representative
  if (a <= -pi) a += Scalar(2) * pi;
  return a;
}

/// Signed shortest rotation from `from` to `to`.
template <typename Scalar>
Scalar angle_diff(Scalar to, Scalar from) {
  return normalize_angle(to - from);
}

inline Vec2 heading_vector(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Left-pointing unit normal of a heading.
inline Vec2 left_normal(double theta) { return {-std::sin(theta), std::cos(theta)}; }

}  // namespace raceplan
