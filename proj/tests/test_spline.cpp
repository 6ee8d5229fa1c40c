#include <doctest.h>

#include <random>
#include <vector>

#include "raceplan/errors.hpp"
#include "raceplan/spline.hpp"
#include "support.hpp"

using namespace raceplan;

namespace {

using V = Eigen::Vector2d;

std::vector<V> random_waypoints(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> step(3.0, 30.0);
  std::uniform_real_distribution<double> turn(-0.6, 0.6);
  std::vector<V> w{V::Zero()};
  double th = 0.0;
  for (int i = 1; i < n; ++i) {
    th += turn(rng);
    w.push_back(w.back() + step(rng) * V(std::cos(th), std::sin(th)));
  }
  return w;
}

}  // namespace

TEST_CASE("c1 segment along the x axis") {
  const auto seg = fit_c1_segment(Pose{0, 0, 0}, Pose{1, 0, 0});
  CHECK(seg.s_len == doctest::Approx(1.0).epsilon(1e-12));
  for (double mu : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    CHECK(seg.point(mu).x() == doctest::Approx(mu).epsilon(1e-12));
    CHECK(std::abs(seg.point(mu).y()) < 1e-15);
    CHECK(std::abs(seg.curvature(mu)) < 1e-12);
  }
}

TEST_CASE("c1 segment reproduces its end poses") {
  const Pose a{0, 0, 0}, b{30, 0.5, 0.02};
  const auto seg = fit_c1_segment(a, b);
  CHECK((seg.point(0.0) - V(0, 0)).norm() < 1e-9);
  CHECK((seg.point(1.0) - V(30, 0.5)).norm() < 1e-9);
  CHECK(std::abs(seg.heading(0.0) - 0.0) < 1e-9);
  CHECK(std::abs(seg.heading(1.0) - 0.02) < 1e-9);
  // heading constraints are scaled by the refined length
  CHECK((seg.d1(0.0) - seg.s_len * V(1, 0)).norm() < 1e-9);
  CHECK((seg.d1(1.0) - seg.s_len * V(std::cos(0.02), std::sin(0.02))).norm() < 1e-9);
}

TEST_CASE("c1 refinement converges to the arc length") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-40.0, 40.0);
  std::uniform_real_distribution<double> dth(-0.5, 0.5);
  double worst = 0.0;
  int fitted = 0;
  while (fitted < 1000) {
    const Pose a{0.0, 0.0, dth(rng) * 6.0};
    const V d(pos(rng), pos(rng));
    if (d.norm() < 1.0) continue;
    // end heading within 0.5 rad of the start heading, chord roughly along it
    const double chord_dir = std::atan2(d.y(), d.x());
    if (std::abs(angle_diff(chord_dir, a.theta)) > 0.5) continue;
    const Pose b{d.x(), d.y(), normalize_angle(a.theta + dth(rng))};
    const auto seg = fit_c1_segment(a, b);
    worst = std::max(worst, std::abs(seg.s_len - rp_test::trapezoid_length(seg)) / seg.s_len);
    ++fitted;
  }
  CHECK(worst < 0.01);
}

TEST_CASE("c1 fit is symmetric under reversal") {
  const Pose a{1, 2, 0.3}, b{25, 9, -0.1};
  const auto fwd = fit_c1_segment_fixed(a, b, 27.0);
  const auto rev = fit_c1_segment_fixed(Pose{b.x, b.y, normalize_angle(b.theta + std::numbers::pi)},
                                        Pose{a.x, a.y, normalize_angle(a.theta + std::numbers::pi)}, 27.0);
  for (double mu = 0.0; mu <= 1.0; mu += 0.05) CHECK((fwd.point(mu) - rev.point(1.0 - mu)).norm() < 1e-6);
}

TEST_CASE("coincident end points are rejected") {
  CHECK_THROWS_AS(fit_c1_segment(Pose{1, 1, 0}, Pose{1, 1.0005, 0}), SplineError);
}

TEST_CASE("c2 chain on a straight line") {
  const std::vector<V> w{{0, 0}, {10, 0}, {20, 0}, {30, 0}};
  const auto segs = solve_c2_chain<double>(w, 0.0, 0.0);
  REQUIRE(segs.size() == 3);
  for (const auto& s : segs) {
    CHECK(s.coef.row(2).norm() < 1e-9);
    CHECK(s.coef.row(3).norm() < 1e-9);
    for (double mu : {0.0, 0.5, 1.0}) CHECK(std::abs(s.curvature(mu)) < 1e-9);
  }
}

TEST_CASE("c2 chain junction residuals") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(2, 51);
  std::uniform_real_distribution<double> th(-0.4, 0.4);
  double worst1 = 0.0, worst2 = 0.0, worst0 = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto w = random_waypoints(rng, len(rng));
    const auto segs = solve_c2_chain<double>(w, th(rng), th(rng));
    REQUIRE(segs.size() == w.size() - 1);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      worst0 = std::max({worst0, (segs[i].point(0) - w[i]).norm(), (segs[i].point(1) - w[i + 1]).norm()});
      if (i + 1 == segs.size()) break;
      worst1 = std::max(worst1, (segs[i].d1(1) - segs[i + 1].d1(0)).norm());
      worst2 = std::max(worst2, (segs[i].d2(1) - segs[i + 1].d2(0)).norm());
    }
  }
  CHECK(worst0 < 1e-9);
  CHECK(worst1 < 1e-9);
  CHECK(worst2 < 1e-9);
}

TEST_CASE("c2 chain honors the boundary headings") {
  const std::vector<V> w{{0, 0}, {12, 3}, {20, 10}, {35, 12}};
  const auto segs = solve_c2_chain<double>(w, 0.1, -0.2);
  CHECK(std::abs(segs.front().heading(0.0) - 0.1) < 1e-12);
  CHECK(std::abs(segs.back().heading(1.0) + 0.2) < 1e-12);
  // tangent magnitude equals the boundary segment's arc length after refinement
  CHECK(segs.front().d1(0.0).norm() == doctest::Approx(arc_length(segs.front())).epsilon(0.02));
}

TEST_CASE("right-angle chain stays curvature continuous") {
  const std::vector<V> w{{0, 0}, {10, 0}, {10, 10}};
  const auto segs = solve_c2_chain<double>(w, 0.0, std::numbers::pi / 2);
  REQUIRE(segs.size() == 2);
  const double mid = segs[0].heading(1.0);
  CHECK(mid > 0.0);
  CHECK(mid < std::numbers::pi / 2);
  // fine parameter scan: curvature on each side of the junction converges
  const double k_left = segs[0].curvature(1.0 - 1e-4);
  const double k_right = segs[1].curvature(1e-4);
  CHECK(std::abs(segs[0].curvature(1.0) - segs[1].curvature(0.0)) < 1e-9);
  CHECK(std::abs(k_left - k_right) < 1e-3 * std::max(std::abs(k_left), 1.0));
  // no step anywhere in the scan
  double prev = segs[0].curvature(0.0);
  for (const auto& s : segs) {
    for (double mu = 1e-4; mu <= 1.0; mu += 1e-4) {
      const double k = s.curvature(mu);
      CHECK_MESSAGE(std::abs(k - prev) < 1e-3, "mu ", mu);
      prev = k;
    }
  }
}

TEST_CASE("duplicate waypoints make the chain singular") {
  const std::vector<V> w{{0, 0}, {5, 0}, {5, 0}, {10, 0}};
  CHECK_THROWS_AS(solve_c2_chain<double>(w, 0.0, 0.0), SplineError);
}

TEST_CASE("start curvature releases the first interior waypoint") {
  const std::vector<V> w{{0, 0}, {6, 0.2}, {12, 0.8}, {18, 1.8}};
  const auto segs = solve_c2_chain<double>(w, 0.0, 0.25, 0.015);
  CHECK(segs.front().curvature(0.0) == doctest::Approx(0.015).epsilon(1e-9));
  CHECK((segs.front().point(0) - w[0]).norm() < 1e-12);
  CHECK((segs.back().point(1) - w.back()).norm() < 1e-9);
  CHECK(std::abs(segs.back().heading(1.0) - 0.25) < 1e-12);
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    CHECK((segs[i].point(1) - segs[i + 1].point(0)).norm() < 1e-9);
    CHECK((segs[i].d1(1) - segs[i + 1].d1(0)).norm() < 1e-9);
    CHECK((segs[i].d2(1) - segs[i + 1].d2(0)).norm() < 1e-9);
  }
  for (std::size_t i = 2; i + 1 < w.size(); ++i) CHECK((segs[i].point(0) - w[i]).norm() < 1e-9);
}

TEST_CASE("sampling") {
  SUBCASE("straight segment has zero curvature") {
    const auto p = sample_segment(fit_c1_segment(Pose{0, 0, 0.7}, Pose{10 * std::cos(0.7), 10 * std::sin(0.7), 0.7}), 20);
    CHECK(p.kappa.abs().maxCoeff() < 1e-12);
    CHECK(p.psi[0] == doctest::Approx(0.7).epsilon(1e-12));
  }
  SUBCASE("segment through a radius-20 arc") {
    // eighth of a circle of radius 20 around (0, 20)
    const double r = 20.0, phi = std::numbers::pi / 4;
    const auto seg = fit_c1_segment(Pose{0, 0, 0}, Pose{r * std::sin(phi), r - r * std::cos(phi), phi});
    const auto p = sample_segment(seg, 41);
    for (Eigen::Index k = 10; k <= 30; ++k) CHECK(std::abs(p.kappa[k] - 1.0 / r) < 0.002);
    CHECK(std::abs(p.psi[0]) < 1e-6);
  }
  SUBCASE("stations are chord sums and increasing") {
    const auto seg = fit_c1_segment(Pose{0, 0, 0}, Pose{20, 5, 0.4});
    const auto p = sample_segment(seg, 30);
    double s = 0.0;
    for (Eigen::Index k = 1; k < p.size(); ++k) {
      s += std::hypot(p.x[k] - p.x[k - 1], p.y[k] - p.y[k - 1]);
      CHECK(p.s[k] > p.s[k - 1]);
      CHECK(p.s[k] == doctest::Approx(s).epsilon(1e-12));
    }
  }
  SUBCASE("cusp is reported") {
    CubicSegment seg;
    seg.s_len = 1.0;
    seg.coef.row(2) << 1.0, 1.0;  // p = (mu^2, mu^2): zero tangent at mu = 0
    CHECK_THROWS_AS(sample_segment(seg, 5), SplineError);
  }
  SUBCASE("too few samples") {
    CHECK_THROWS(sample_segment(fit_c1_segment(Pose{0, 0, 0}, Pose{1, 0, 0}), 1));
  }
}

TEST_CASE("sub segment and chain cut") {
  const std::vector<V> w{{0, 0}, {10, 1}, {20, 4}, {30, 9}};
  const auto segs = solve_c2_chain<double>(w, 0.0, 0.5);
  const auto sub = sub_segment(segs[1], 0.3, 0.8);
  for (double u : {0.0, 0.2, 0.5, 1.0}) {
    CHECK((sub.point(u) - segs[1].point(0.3 + 0.5 * u)).norm() < 1e-12);
    CHECK(sub.curvature(u) == doctest::Approx(segs[1].curvature(0.3 + 0.5 * u)).epsilon(1e-9));
  }
  double total = 0.0;
  for (const auto& s : segs) total += arc_length(s);
  const auto tail = chain_from<double>(segs, 12.5);
  REQUIRE(!tail.empty());
  double rest = 0.0;
  for (const auto& s : tail) rest += arc_length(s);
  CHECK(rest == doctest::Approx(total - 12.5).epsilon(1e-6));
  CHECK((tail.back().point(1) - w.back()).norm() < 1e-9);
  CHECK(chain_from<double>(segs, total + 1.0).empty());
}
