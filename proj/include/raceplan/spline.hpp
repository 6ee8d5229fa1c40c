#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "raceplan/errors.hpp"
#include "raceplan/geometry.hpp"

namespace raceplan {

template <typename Scalar>
struct PoseT {
  Scalar x = 0;
  Scalar y = 0;
  Scalar theta = 0;

  Eigen::Matrix<Scalar, 2, 1> position() const { return {x, y}; }
  bool operator==(const PoseT&) const = default;
};
using Pose = PoseT<double>;

/// Planar cubic over the shared path parameter mu in [0, 1]:
///   p(mu) = a0 + a1 mu + a2 mu^2 + a3 mu^3
/// Row k of `coef` holds a_k, column 0 is x and column 1 is y.
template <typename Scalar>
struct CubicSegmentT {
  using Vec = Eigen::Matrix<Scalar, 2, 1>;
  using Coeffs = Eigen::Matrix<Scalar, 4, 2>;

  Coeffs coef = Coeffs::Zero();
  Scalar s_len = 0;

  Vec point(Scalar mu) const {
    return (coef.row(0) + mu * (coef.row(1) + mu * (coef.row(2) + mu * coef.row(3)))).transpose();
  }
  Vec d1(Scalar mu) const {
    return (coef.row(1) + mu * (Scalar(2) * coef.row(2) + Scalar(3) * mu * coef.row(3))).transpose();
  }
  Vec d2(Scalar mu) const { return (Scalar(2) * coef.row(2) + Scalar(6) * mu * coef.row(3)).transpose(); }

  Scalar heading(Scalar mu) const {
    const Vec d = d1(mu);
    return std::atan2(d.y(), d.x());
  }
  Scalar curvature(Scalar mu) const {
    const Vec a = d1(mu);
    const Vec b = d2(mu);
    const Scalar speed2 = a.squaredNorm();
    return (a.x() * b.y() - a.y() * b.x()) / (speed2 * std::sqrt(speed2));
  }
};
using CubicSegment = CubicSegmentT<double>;

/// Samples along a path. `s` is cumulative chord length from the first sample.
template <typename Scalar>
struct SampledPathT {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  Array s, x, y, psi, kappa;

  Eigen::Index size() const { return s.size(); }
  void resize(Eigen::Index n) {
    s.resize(n);
    x.resize(n);
    y.resize(n);
    psi.resize(n);
    kappa.resize(n);
  }
  Scalar length() const { return size() > 0 ? s[size() - 1] : Scalar(0); }
};
using SampledPath = SampledPathT<double>;

template <typename Scalar>
bool operator==(const SampledPathT<Scalar>& a, const SampledPathT<Scalar>& b) {
  return a.size() == b.size() && (a.s == b.s).all() && (a.x == b.x).all() && (a.y == b.y).all() &&
         (a.psi == b.psi).all() && (a.kappa == b.kappa).all();
}

template <typename Scalar>
bool operator==(const CubicSegmentT<Scalar>& a, const CubicSegmentT<Scalar>& b) {
  return a.coef == b.coef && a.s_len == b.s_len;
}

struct FitOptions {
  double rel_tol = 1e-3;
  int max_iterations = 10;
};

namespace detail {

// 5-point Gauss-Legendre nodes/weights on [-1, 1]
inline constexpr std::array<double, 5> kGaussNodes = {0.0, -0.5384693101056831, 0.5384693101056831,
                                                      -0.9061798459386640, 0.9061798459386640};
inline constexpr std::array<double, 5> kGaussWeights = {0.5688888888888889, 0.4786286704993665,
                                                        0.4786286704993665, 0.2369268850561891,
                                                        0.2369268850561891};

template <typename Scalar>
void unwrap_from(typename SampledPathT<Scalar>::Array& psi, Eigen::Index first) {
  for (Eigen::Index i = std::max<Eigen::Index>(first, 1); i < psi.size(); ++i) {
    psi[i] = psi[i - 1] + angle_diff(psi[i], psi[i - 1]);
  }
}

}  // namespace detail

/// Hermite form: end positions plus mu-derivatives at both ends.
template <typename Scalar>
typename CubicSegmentT<Scalar>::Coeffs hermite_coefficients(const Eigen::Matrix<Scalar, 2, 1>& ps,
                                                             const Eigen::Matrix<Scalar, 2, 1>& pe,
                                                             const Eigen::Matrix<Scalar, 2, 1>& dps,
                                                             const Eigen::Matrix<Scalar, 2, 1>& dpe) {
  typename CubicSegmentT<Scalar>::Coeffs c;
  c.row(0) = ps.transpose();
  c.row(1) = dps.transpose();
  c.row(2) = (Scalar(3) * (pe - ps) - Scalar(2) * dps - dpe).transpose();
  c.row(3) = (Scalar(2) * (ps - pe) + dps + dpe).transpose();
  return c;
}

/// Arc length between mu0 and mu1 by composite Gauss-Legendre quadrature.
template <typename Scalar>
Scalar arc_length(const CubicSegmentT<Scalar>& seg, Scalar mu0 = 0, Scalar mu1 = 1, int panels = 16) {
  const Scalar h = (mu1 - mu0) / panels;
  Scalar total = 0;
  for (int p = 0; p < panels; ++p) {
    const Scalar mid = mu0 + h * (p + Scalar(0.5));
    for (std::size_t k = 0; k < detail::kGaussNodes.size(); ++k) {
      total += Scalar(detail::kGaussWeights[k]) * seg.d1(mid + Scalar(0.5) * h * Scalar(detail::kGaussNodes[k])).norm();
    }
  }
  return total * Scalar(0.5) * h;
}

/// C1 segment between two poses with the heading constraint scaled by a given length.
template <typename Scalar>
CubicSegmentT<Scalar> fit_c1_segment_fixed(const PoseT<Scalar>& start, const PoseT<Scalar>& end, Scalar s_len) {
  using Vec = Eigen::Matrix<Scalar, 2, 1>;
  CubicSegmentT<Scalar> seg;
  seg.s_len = s_len;
  seg.coef = hermite_coefficients<Scalar>(start.position(), end.position(),
                                          Vec(std::cos(start.theta), std::sin(start.theta)) * s_len,
                                          Vec(std::cos(end.theta), std::sin(end.theta)) * s_len);
  return seg;
}

/// C1 segment between two poses. The length used to scale the heading
/// constraints starts at the end-point distance and is replaced by the
/// integrated arc length until it settles.
template <typename Scalar>
CubicSegmentT<Scalar> fit_c1_segment(const PoseT<Scalar>& start, const PoseT<Scalar>& end,
                                     const FitOptions& opts = {}) {
  const Scalar chord = (end.position() - start.position()).norm();
  if (!(chord > Scalar(1e-3))) throw SplineError("fit_c1_segment: coincident end points");

  Scalar len = chord;
  auto seg = fit_c1_segment_fixed(start, end, len);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Scalar next = arc_length(seg);
    const bool done = std::abs(next - len) <= Scalar(opts.rel_tol) * len;
    len = next;
    seg = fit_c1_segment_fixed(start, end, len);
    if (done) break;
  }
  return seg;
}

/// Cubic chain through `waypoints` that matches first and second mu-derivatives
/// at every interior junction. The chain's start and end headings are imposed
/// with the mu-derivative scaled by the boundary segment length: first the
/// chord, then the arc length of an initial solve. Both coordinates share one
/// sparse factorization.
///
/// With `kappa_start`, the chain also starts with that curvature; the first
/// interior waypoint is then released (only position continuity is kept
/// there) to free the extra condition. Needs at least two segments, otherwise
/// the curvature is ignored.
template <typename Scalar>
std::vector<CubicSegmentT<Scalar>> solve_c2_chain(std::span<const Eigen::Matrix<Scalar, 2, 1>> waypoints,
                                                  Scalar theta_start, Scalar theta_end,
                                                  std::optional<Scalar> kappa_start = std::nullopt) {
  using Vec = Eigen::Matrix<Scalar, 2, 1>;
  using SpMat = Eigen::SparseMatrix<Scalar>;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

  if (waypoints.size() < 2) throw SplineError("solve_c2_chain: need at least two waypoints");
  const int n = static_cast<int>(waypoints.size()) - 1;
  for (int i = 0; i < n; ++i) {
    if (!((waypoints[i + 1] - waypoints[i]).norm() > Scalar(1e-6))) {
      throw SplineError("solve_c2_chain: duplicate consecutive waypoints at " + std::to_string(i));
    }
  }

  const int dim = 4 * n;
  std::vector<Eigen::Triplet<Scalar>> trips;
  trips.reserve(static_cast<std::size_t>(dim) * 4);
  auto col = [](int seg, int k) { return 4 * seg + k; };

  int row = 0;
  const int start_row = row++;
  trips.emplace_back(start_row, col(0, 1), Scalar(1));
  const bool release = kappa_start.has_value() && n >= 2;
  int curv_row = -1;
  std::vector<int> pos_rows(static_cast<std::size_t>(2 * n), -1);
  for (int i = 0; i < n; ++i) {
    if (release && i == 1) {
      // start curvature: p''(0) = L^2 kappa n
      curv_row = row;
      trips.emplace_back(row++, col(0, 2), Scalar(2));
    } else {
      pos_rows[2 * i] = row;
      trips.emplace_back(row++, col(i, 0), Scalar(1));
    }
    if (release && i == 0) {
      // released junction: end of segment 0 meets start of segment 1
      for (int k = 0; k < 4; ++k) trips.emplace_back(row, col(0, k), Scalar(1));
      trips.emplace_back(row++, col(1, 0), Scalar(-1));
    } else {
      pos_rows[2 * i + 1] = row;
      for (int k = 0; k < 4; ++k) trips.emplace_back(row, col(i, k), Scalar(1));
      ++row;
    }
    if (i + 1 < n) {
      // first derivative continuity
      trips.emplace_back(row, col(i, 1), Scalar(1));
      trips.emplace_back(row, col(i, 2), Scalar(2));
      trips.emplace_back(row, col(i, 3), Scalar(3));
      trips.emplace_back(row++, col(i + 1, 1), Scalar(-1));
      // second derivative continuity: p''(1) = 2 a2 + 6 a3, p''(0) = 2 a2
      trips.emplace_back(row, col(i, 2), Scalar(2));
      trips.emplace_back(row, col(i, 3), Scalar(6));
      trips.emplace_back(row++, col(i + 1, 2), Scalar(-2));
    }
  }
  const int end_row = row++;
  trips.emplace_back(end_row, col(n - 1, 1), Scalar(1));
  trips.emplace_back(end_row, col(n - 1, 2), Scalar(2));
  trips.emplace_back(end_row, col(n - 1, 3), Scalar(3));

  SpMat a(dim, dim);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SplineError("solve_c2_chain: singular system");

  Dense rhs = Dense::Zero(dim, 2);
  for (int i = 0; i < n; ++i) {
    if (pos_rows[2 * i] >= 0) rhs.row(pos_rows[2 * i]) = waypoints[i].transpose();
    if (pos_rows[2 * i + 1] >= 0) rhs.row(pos_rows[2 * i + 1]) = waypoints[i + 1].transpose();
  }
  const Vec ts(std::cos(theta_start), std::sin(theta_start));
  const Vec te(std::cos(theta_end), std::sin(theta_end));
  const Vec ns(-ts.y(), ts.x());

  auto solve = [&](Scalar len_first, Scalar len_last) {
    rhs.row(start_row) = (ts * len_first).transpose();
    rhs.row(end_row) = (te * len_last).transpose();
    if (curv_row >= 0) rhs.row(curv_row) = (ns * (len_first * len_first * *kappa_start)).transpose();
    const Dense sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite()) throw SplineError("solve_c2_chain: solve failed");
    std::vector<CubicSegmentT<Scalar>> segs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) segs[i].coef = sol.template middleRows<4>(4 * i);
    return segs;
  };

  auto segs = solve((waypoints[1] - waypoints[0]).norm(), (waypoints[n] - waypoints[n - 1]).norm());
  const Scalar len_first = arc_length(segs.front());
  const Scalar len_last = arc_length(segs.back());
  segs = solve(len_first, len_last);
  for (auto& s : segs) s.s_len = arc_length(s);
  return segs;
}

/// `n` samples uniformly spaced in mu. Throws SplineError at a cusp.
template <typename Scalar>
SampledPathT<Scalar> sample_segment(const CubicSegmentT<Scalar>& seg, int n) {
  if (n < 2) throw SplineError("sample_segment: need at least two samples");
  SampledPathT<Scalar> out;
  out.resize(n);
  const Scalar cusp = Scalar(1e-6) * seg.s_len;
  for (int i = 0; i < n; ++i) {
    const Scalar mu = Scalar(i) / Scalar(n - 1);
    const auto p = seg.point(mu);
    const auto d = seg.d1(mu);
    if (d.norm() < cusp) throw SplineError("sample_segment: cusp at mu=" + std::to_string(static_cast<double>(mu)));
    out.x[i] = p.x();
    out.y[i] = p.y();
    out.psi[i] = std::atan2(d.y(), d.x());
    out.kappa[i] = seg.curvature(mu);
    out.s[i] = i == 0 ? Scalar(0) : out.s[i - 1] + std::hypot(out.x[i] - out.x[i - 1], out.y[i] - out.y[i - 1]);
  }
  detail::unwrap_from<Scalar>(out.psi, 1);
  return out;
}

/// Samples a segment chain with roughly `step` spacing, junction points shared.
template <typename Scalar>
SampledPathT<Scalar> sample_chain(std::span<const CubicSegmentT<Scalar>> segs, Scalar step) {
  std::vector<SampledPathT<Scalar>> parts;
  Eigen::Index total = 1;
  for (const auto& seg : segs) {
    const int intervals = std::max(1, static_cast<int>(std::ceil(seg.s_len / step)));
    parts.push_back(sample_segment(seg, intervals + 1));
    total += intervals;
  }
  SampledPathT<Scalar> out;
  out.resize(total);
  Eigen::Index k = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& part = parts[p];
    const Eigen::Index first = p == 0 ? 0 : 1;
    for (Eigen::Index i = first; i < part.size(); ++i, ++k) {
      out.x[k] = part.x[i];
      out.y[k] = part.y[i];
      out.psi[k] = part.psi[i];
      out.kappa[k] = part.kappa[i];
      out.s[k] = k == 0 ? Scalar(0) : out.s[k - 1] + std::hypot(out.x[k] - out.x[k - 1], out.y[k] - out.y[k - 1]);
    }
  }
  detail::unwrap_from<Scalar>(out.psi, 1);
  return out;
}

/// The part of `seg` between mu0 and mu1, reparametrized over [0, 1].
template <typename Scalar>
CubicSegmentT<Scalar> sub_segment(const CubicSegmentT<Scalar>& seg, Scalar mu0, Scalar mu1) {
  const Scalar d = mu1 - mu0;
  CubicSegmentT<Scalar> out;
  out.coef.row(0) = seg.point(mu0).transpose();
  out.coef.row(1) = (d * seg.d1(mu0)).transpose();
  out.coef.row(2) = (Scalar(0.5) * d * d * seg.d2(mu0)).transpose();
  out.coef.row(3) = d * d * d * seg.coef.row(3);
  out.s_len = arc_length(out);
  return out;
}

/// Chain from arc length `s` onward (bisection for the cut parameter).
/// Empty when `s` lies beyond the chain.
template <typename Scalar>
std::vector<CubicSegmentT<Scalar>> chain_from(std::span<const CubicSegmentT<Scalar>> segs, Scalar s) {
  std::size_t i = 0;
  while (i < segs.size() && s >= segs[i].s_len) s -= segs[i++].s_len;
  if (i == segs.size()) return {};
  Scalar lo = 0, hi = 1;
  for (int it = 0; it < 50 && s > 0; ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    (arc_length(segs[i], Scalar(0), mid) < s ? lo : hi) = mid;
  }
  std::vector<CubicSegmentT<Scalar>> out;
  out.push_back(s > 0 ? sub_segment(segs[i], lo, Scalar(1)) : segs[i]);
  out.insert(out.end(), segs.begin() + static_cast<std::ptrdiff_t>(i) + 1, segs.end());
  return out;
}

}  // namespace raceplan
