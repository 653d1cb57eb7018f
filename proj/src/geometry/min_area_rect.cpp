#include <cmath>
#include <limits>
#include <numbers>

#include "vrucp/geometry.hpp"

namespace vrucp::geometry {

std::array<Point2D, 4> OrientedRect::corners() const {
  const Point2D along = rotate({half_len, 0.0}, orientation);
  const Point2D across = rotate({0.0, half_wid}, orientation);
  return {center + along + across, center - along + across, center - along - across,
          center + along - across};
}

// Every edge of the hull is tried as the base of the box; the optimum is
// known to share a side with some hull edge.
OrientedRect min_area_rect(std::span<const Point2D> points) {
  const Polygon hull = convex_hull(points);
  const auto& v = hull.vertices;
  const std::size_t n = v.size();

  double best_area = std::numeric_limits<double>::infinity();
  OrientedRect best;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D edge = v[(i + 1) % n] - v[i];
    const Point2D e = (1.0 / norm(edge)) * edge;
    const Point2D nrm{-e.y, e.x};
    double lo_e = 0.0, hi_e = 0.0, lo_n = 0.0, hi_n = 0.0;
    for (const auto& p : v) {
      const Point2D d = p - v[i];
      lo_e = std::min(lo_e, dot(d, e));
      hi_e = std::max(hi_e, dot(d, e));
      lo_n = std::min(lo_n, dot(d, nrm));
      hi_n = std::max(hi_n, dot(d, nrm));
    }
    const double a = (hi_e - lo_e) * (hi_n - lo_n);
    if (a < best_area) {
      best_area = a;
      best.center = v[i] + (0.5 * (lo_e + hi_e)) * e + (0.5 * (lo_n + hi_n)) * nrm;
      best.half_len = 0.5 * (hi_e - lo_e);
      best.half_wid = 0.5 * (hi_n - lo_n);
      best.orientation = std::atan2(e.y, e.x);
    }
  }
  if (best.half_len < best.half_wid) {
    std::swap(best.half_len, best.half_wid);
    best.orientation += 0.5 * std::numbers::pi;
  }
  best.orientation = std::fmod(best.orientation, std::numbers::pi);
  if (best.orientation < 0.0) best.orientation += std::numbers::pi;
  return best;
}

}  // namespace vrucp::geometry
