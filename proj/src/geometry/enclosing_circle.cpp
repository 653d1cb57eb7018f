#include <algorithm>
#include <random>
#include <vector>

#include "vrucp/errors.hpp"
#include "vrucp/geometry.hpp"

namespace vrucp::geometry {

namespace {

bool covers(const Circle& c, Point2D p) {
  return distance(c.center, p) <= c.radius + 1e-12 * std::max(1.0, c.radius);
}

Circle diametral(Point2D a, Point2D b) {
  const Point2D mid = 0.5 * (a + b);
  return {mid, std::max(distance(mid, a), distance(mid, b))};
}

Circle circumcircle(Point2D a, Point2D b, Point2D c) {
  const Point2D ab = b - a;
  const Point2D ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double scale = std::max({dot(ab, ab), dot(ac, ac), 1e-300});
  if (std::abs(d) <= 1e-14 * scale) {
    // Nearly collinear: the widest pair spans the other point.
    Circle best = diametral(a, b);
    for (const Circle& cand : {diametral(a, c), diametral(b, c)}) {
      if (cand.radius > best.radius) best = cand;
    }
    return best;
  }
  const double ab2 = dot(ab, ab);
  const double ac2 = dot(ac, ac);
  const Point2D center = a + Point2D{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
  const double r = std::max({distance(center, a), distance(center, b), distance(center, c)});
  return {center, r};
}

}  // namespace

Circle min_enclosing_circle(std::span<const Point2D> points, std::uint64_t seed) {
  if (points.empty()) throw InvalidInputError("min_enclosing_circle: empty point set");
  std::vector<Point2D> pts(points.begin(), points.end());
  for (const auto& p : pts) {
    if (!is_finite(p)) throw InvalidInputError("min_enclosing_circle: non-finite point");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pts.begin(), pts.end(), rng);

  Circle c{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (covers(c, pts[i])) continue;
    c = Circle{pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (covers(c, pts[j])) continue;
      c = diametral(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (covers(c, pts[k])) continue;
        c = circumcircle(pts[i], pts[j], pts[k]);
      }
    }
  }
  return c;
}

}  // namespace vrucp::geometry
