#include "raceplan/sim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace raceplan::sim {

namespace {

struct Frame {
  double x0, y0, x1, y1, scale;
  double px(double x) const { return (x - x0) * scale + 10.0; }
  double py(double y) const { return (y1 - y) * scale + 10.0; }
};

void polyline(std::ostringstream& o, const Frame& f, const std::vector<Vec2>& pts, const char* style, bool closed) {
  o << (closed ? "<polygon" : "<polyline") << " fill=\"none\" " << style << " points=\"";
  for (const auto& p : pts) o << f.px(p.x()) << ',' << f.py(p.y()) << ' ';
  o << "\"/>\n";
}

void samples(std::ostringstream& o, const Frame& f, const std::vector<PositionSample>& path, double spacing,
             const char* color) {
  double next = 0.0;
  for (const auto& p : path) {
    if (p.t + 1e-9 < next) continue;
    o << "<circle cx=\"" << f.px(p.x) << "\" cy=\"" << f.py(p.y) << "\" r=\"2\" fill=\"" << color << "\"/>\n";
    next += spacing;
    while (next <= p.t) next += spacing;
  }
}

}  // namespace

std::string render_svg(const Scenario& sc, const ReferenceLine& line, const SimResult& result) {
  std::vector<Vec2> center, left, right;
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const auto& p : line.points()) {
    center.emplace_back(p.x, p.y);
    left.push_back(line.to_cartesian(p.s, p.w_left));
    right.push_back(line.to_cartesian(p.s, -p.w_right));
    for (const auto& q : {left.back(), right.back()}) {
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
  }
  const double width = 1600.0;
  const double scale = width / std::max(1.0, hi.x() - lo.x());
  const Frame f{lo.x(), lo.y(), hi.x(), hi.y(), scale};
  const double height = (hi.y() - lo.y()) * scale + 20.0;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width + 20.0 << "\" height=\"" << height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t zi = 0; zi < sc.zones.size(); ++zi) {
    const auto& z = sc.zones[zi];
    double len = z.s_end - z.s_start;
    if (len < 0.0) len += line.lap_length();
    std::vector<Vec2> poly;
    for (double d = 0.0; d <= len; d += 2.0) {
      const auto p = line.interpolate(z.s_start + d);
      poly.push_back(line.to_cartesian(p.s, z.side == Side::kLeft ? p.w_left : -p.w_right));
    }
    for (double d = len; d >= 0.0; d -= 2.0) poly.push_back(line.to_cartesian(z.s_start + d, z.l_inner));
    o << "<polygon fill=\"#cccccc\" stroke=\"none\" points=\"";
    for (const auto& p : poly) o << f.px(p.x()) << ',' << f.py(p.y()) << ' ';
    o << "\"/>\n";
  }
  polyline(o, f, left, "stroke=\"black\" stroke-width=\"1\"", true);
  polyline(o, f, right, "stroke=\"black\" stroke-width=\"1\"", true);
  polyline(o, f, center, "stroke=\"#1f77b4\" stroke-width=\"1\" stroke-dasharray=\"4 3\"", true);
  for (const auto& ob : sc.obstacles) {
    const Vec2 p = ob.frenet ? line.to_cartesian(ob.frenet->s, ob.frenet->l) : Vec2(ob.x, ob.y);
    o << "<circle cx=\"" << f.px(p.x()) << "\" cy=\"" << f.py(p.y()) << "\" r=\"" << ob.r * scale
      << "\" fill=\"#d62728\"/>\n";
  }
  samples(o, f, result.lead_path, sc.plot_spacing, "#1f3fb4");
  samples(o, f, result.ego_path, sc.plot_spacing, "#ff7f0e");
  o << "</svg>\n";
  return o.str();
}

}  // namespace raceplan::sim
