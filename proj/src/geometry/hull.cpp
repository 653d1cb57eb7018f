#include <algorithm>
#include <vector>

#include "vrucp/errors.hpp"
#include "vrucp/geometry.hpp"

namespace vrucp::geometry {

double Polygon::signed_area() const {
  double twice = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(vertices[i], vertices[(i + 1) % n]);
  }
  return 0.5 * twice;
}

Polygon convex_hull(std::span<const Point2D> points) {
  if (points.size() < 3) {
    throw DegenerateInputError("convex_hull: need at least 3 points, got " +
                               std::to_string(points.size()));
  }
  std::vector<Point2D> pts(points.begin(), points.end());
  for (const auto& p : pts) {
    if (!is_finite(p)) throw InvalidInputError("convex_hull: non-finite point");
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  // Andrew's monotone chain; popping on orientation <= 0 drops collinear
  // boundary points.
  std::vector<Point2D> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && orientation(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && orientation(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k > 0 ? k - 1 : 0);

  if (hull.size() < 3) {
    throw DegenerateInputError("convex_hull: input points are collinear");
  }
  return Polygon{std::move(hull)};
}

}  // namespace vrucp::geometry
